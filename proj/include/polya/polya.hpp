#pragma once

#include "polya/asymptotics.hpp"
#include "polya/color.hpp"
#include "polya/error.hpp"
#include "polya/experiment.hpp"
#include "polya/io.hpp"
#include "polya/kernels.hpp"
#include "polya/random.hpp"
#include "polya/rational.hpp"
#include "polya/rrt.hpp"
#include "polya/sampler.hpp"
#include "polya/stats.hpp"
#include "polya/suites.hpp"
#include "polya/urn.hpp"
