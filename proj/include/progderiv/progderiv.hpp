#pragma once

// Umbrella header: the whole boundary-analysis toolkit.

#include "progderiv/compress.hpp"
#include "progderiv/derivative.hpp"
#include "progderiv/distance.hpp"
#include "progderiv/errors.hpp"
#include "progderiv/explore.hpp"
#include "progderiv/report.hpp"
#include "progderiv/rng.hpp"
#include "progderiv/sut.hpp"
#include "progderiv/value.hpp"
#include "progderiv/version.hpp"
