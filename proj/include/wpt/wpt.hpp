// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "baseline.hpp"
#include "channel.hpp"
#include "channel_io.hpp"
#include "convex.hpp"
#include "errors.hpp"
#include "harness.hpp"
#include "numerics.hpp"
#include "opt_abf.hpp"
#include "opt_dc.hpp"
#include "opt_rf.hpp"
#include "posynomial.hpp"
#include "rectenna.hpp"
#include "solution.hpp"
