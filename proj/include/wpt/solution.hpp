// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "errors.hpp"
#include "numerics.hpp"
#include "rectenna.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace wpt {

enum class Scheme { DcOpt, DcAss, RfOpt, RfAss, RfAbf };

inline std::string_view scheme_name(Scheme s) {
    switch (s) {
    case Scheme::DcOpt: return "dc-opt";
    case Scheme::DcAss: return "dc-ass";
    case Scheme::RfOpt: return "rf-opt";
    case Scheme::RfAss: return "rf-ass";
    case Scheme::RfAbf: return "rf-abf";
    }
    return "?";
}

inline Scheme parse_scheme(std::string_view name) {
    for (Scheme s : {Scheme::DcOpt, Scheme::DcAss, Scheme::RfOpt, Scheme::RfAss, Scheme::RfAbf})
        if (scheme_name(s) == name) return s;
    throw ValidationError("unknown scheme '" + std::string(name) + "'");
}

inline bool is_dc_scheme(Scheme s) { return s == Scheme::DcOpt || s == Scheme::DcAss; }

/// Iteration bookkeeping for the SCA loops.
struct SolveReport {
    int iterations = 0;
    bool converged = false;
    bool degenerate = false;     // zero channel or no usable tone
    double relative_step = 0.0;  // last stopping-rule quantity
    std::vector<double> objective_trace;
};

struct SolveOptions {
    double epsilon = 1e-4;
    int max_iterations = 100;
};

/// Result of one optimizer. `objective` is what the scheme maximizes:
/// total output DC power sum_q v_q^2 / R_L for DC combining, v_out for RF
/// combining. `receive` holds one beamformer per tone for RF schemes and is
/// empty for DC schemes.
struct CombinerSolution {
    Scheme scheme = Scheme::DcOpt;
    Waveform waveform;
    std::vector<CVector> receive;
    double objective = 0.0;
    SolveReport report;
};

} // namespace wpt
