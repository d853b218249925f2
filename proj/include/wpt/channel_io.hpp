// SPDX-License-Identifier: Apache-2.0
//
// JSON persistence for Channel.
//
//   { "M": 2, "N": 4, "Q": 2, "center_hz": 5.18e9, "bandwidth_hz": 1e7,
//     "seed": 42, "realization": 0,
//     "tap_powers": [...], "tap_spacing_s": 1e-8,
//     "matrices": [ { "re": [[..],[..]], "im": [[..],[..]] }, ... ] }
//
// Matrices are Q x M, row-major, one per tone. "realization", "tap_powers"
// and "tap_spacing_s" are optional on input. Doubles are written with
// shortest round-trip formatting so save/load is bit-exact.

#pragma once

#include "channel.hpp"
#include "errors.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <string>

namespace wpt {

inline nlohmann::json channel_to_json(const Channel& c) {
    nlohmann::json j;
    j["M"] = c.tx;
    j["N"] = c.tone_count();
    j["Q"] = c.rx;
    j["center_hz"] = c.provenance.plan.center_hz;
    j["bandwidth_hz"] = c.provenance.plan.bandwidth_hz;
    j["seed"] = c.provenance.seed;
    j["realization"] = c.provenance.realization;
    j["tap_powers"] = c.provenance.profile.powers;
    j["tap_spacing_s"] = c.provenance.profile.spacing_s;
    auto& mats = j["matrices"] = nlohmann::json::array();
    for (const auto& H : c.tones) {
        nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
        for (std::size_t q = 0; q < H.rows(); ++q) {
            nlohmann::json rr = nlohmann::json::array(), ir = nlohmann::json::array();
            for (std::size_t m = 0; m < H.cols(); ++m) {
                rr.push_back(H(q, m).real());
                ir.push_back(H(q, m).imag());
            }
            re.push_back(std::move(rr));
            im.push_back(std::move(ir));
        }
        mats.push_back({{"re", std::move(re)}, {"im", std::move(im)}});
    }
    return j;
}

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& j, const std::string& key, const std::string& ctx) {
    if (!j.is_object() || !j.contains(key)) throw ParseError("channel file: missing field '" + ctx + key + "'");
    return j.at(key);
}

inline std::size_t read_count(const nlohmann::json& j, const std::string& key) {
    const auto& v = require_field(j, key, "");
    if (!v.is_number_integer() || v.get<std::int64_t>() <= 0)
        throw ParseError("channel file: field '" + key + "' must be a positive integer");
    return v.get<std::size_t>();
}

inline double read_number(const nlohmann::json& v, const std::string& where) {
    if (!v.is_number()) throw ParseError("channel file: field '" + where + "' must be a number");
    return v.get<double>();
}

} // namespace detail

inline Channel channel_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParseError("channel file: top level must be an object");
    Channel c;
    c.tx = detail::read_count(j, "M");
    c.rx = detail::read_count(j, "Q");
    const std::size_t n_tones = detail::read_count(j, "N");

    c.provenance.plan.tones = n_tones;
    c.provenance.plan.center_hz = detail::read_number(detail::require_field(j, "center_hz", ""), "center_hz");
    c.provenance.plan.bandwidth_hz = detail::read_number(detail::require_field(j, "bandwidth_hz", ""), "bandwidth_hz");
    const auto& seed = detail::require_field(j, "seed", "");
    if (!seed.is_number_unsigned()) throw ParseError("channel file: field 'seed' must be a nonnegative integer");
    c.provenance.seed = seed.get<std::uint64_t>();
    if (j.contains("realization")) {
        if (!j["realization"].is_number_unsigned())
            throw ParseError("channel file: field 'realization' must be a nonnegative integer");
        c.provenance.realization = j["realization"].get<std::uint64_t>();
    }
    c.provenance.profile = TapProfile::flat();
    if (j.contains("tap_powers")) {
        const auto& tp = j["tap_powers"];
        if (!tp.is_array()) throw ParseError("channel file: field 'tap_powers' must be an array");
        c.provenance.profile.powers.clear();
        for (std::size_t l = 0; l < tp.size(); ++l)
            c.provenance.profile.powers.push_back(detail::read_number(tp[l], "tap_powers[" + std::to_string(l) + "]"));
    }
    if (j.contains("tap_spacing_s"))
        c.provenance.profile.spacing_s = detail::read_number(j["tap_spacing_s"], "tap_spacing_s");

    const auto& mats = detail::require_field(j, "matrices", "");
    if (!mats.is_array()) throw ParseError("channel file: field 'matrices' must be an array");
    if (mats.size() != n_tones)
        throw ParseError("channel file: header N = " + std::to_string(n_tones) + " but 'matrices' has " +
                         std::to_string(mats.size()) + " entries");

    c.tones.reserve(n_tones);
    for (std::size_t n = 0; n < n_tones; ++n) {
        const std::string ctx = "matrices[" + std::to_string(n) + "].";
        const auto& re = detail::require_field(mats[n], "re", ctx);
        const auto& im = detail::require_field(mats[n], "im", ctx);
        CMatrix H(c.rx, c.tx);
        for (const auto* part : {&re, &im}) {
            const std::string name = ctx + (part == &re ? "re" : "im");
            if (!part->is_array() || part->size() != c.rx)
                throw ParseError("channel file: '" + name + "' must have Q = " + std::to_string(c.rx) + " rows");
            for (std::size_t q = 0; q < c.rx; ++q) {
                const auto& row = (*part)[q];
                if (!row.is_array() || row.size() != c.tx)
                    throw ParseError("channel file: '" + name + "[" + std::to_string(q) + "]' must have M = " +
                                     std::to_string(c.tx) + " entries");
                for (std::size_t m = 0; m < c.tx; ++m) {
                    const double v =
                        detail::read_number(row[m], name + "[" + std::to_string(q) + "][" + std::to_string(m) + "]");
                    if (part == &re)
                        H(q, m).real(v);
                    else
                        H(q, m).imag(v);
                }
            }
        }
        c.tones.push_back(std::move(H));
    }
    try {
        c.validate();
    } catch (const std::exception& e) {
        throw ParseError(std::string("channel file: ") + e.what());
    }
    return c;
}

inline void save_channel(const Channel& c, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_channel: cannot open '" + path + "' for writing");
    out << channel_to_json(c).dump(1) << '\n';
    if (!out) throw std::runtime_error("save_channel: write failed for '" + path + "'");
}

inline Channel load_channel(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_channel: cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        // translate the byte offset into a line number
        std::size_t line = 1;
        for (std::size_t i = 0; i < std::min<std::size_t>(e.byte, text.size()); ++i)
            if (text[i] == '\n') ++line;
        throw ParseError("channel file '" + path + "': line " + std::to_string(line) + ": " + e.what());
    }
    return channel_from_json(j);
}

} // namespace wpt
