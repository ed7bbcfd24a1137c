#ifndef GLOCAL_GLOCAL_HPP
#define GLOCAL_GLOCAL_HPP

#include "glocal/model.hpp"
#include "glocal/random.hpp"
#include "glocal/sampler.hpp"
#include "glocal/summaries.hpp"
#include "glocal/diagnostics.hpp"
#include "glocal/synthgen.hpp"
#include "glocal/io.hpp"
#include "glocal/cli.hpp"

#endif  // GLOCAL_GLOCAL_HPP
