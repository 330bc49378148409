#pragma once

#include "hurst/error.hpp"
#include "hurst/params.hpp"
#include "hurst/symbols.hpp"
#include "hurst/toeplitz.hpp"
#include "hurst/moments.hpp"
#include "hurst/fgn.hpp"
#include "hurst/factorization.hpp"
#include "hurst/posterior.hpp"
#include "hurst/stats.hpp"
#include "hurst/harness.hpp"
