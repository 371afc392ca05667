#pragma once

// Umbrella header.

#include "kgsys/config.hpp"
#include "kgsys/decomposition.hpp"
#include "kgsys/error.hpp"
#include "kgsys/evolution.hpp"
#include "kgsys/fft.hpp"
#include "kgsys/fit.hpp"
#include "kgsys/grid.hpp"
#include "kgsys/harness.hpp"
#include "kgsys/nonlinearity.hpp"
#include "kgsys/profile.hpp"
#include "kgsys/rational.hpp"
#include "kgsys/structure.hpp"
#include "kgsys/tensor.hpp"
