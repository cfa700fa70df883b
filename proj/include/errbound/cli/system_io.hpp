/**
 *  \file
 *  JSON system files:
 *
 *      {"space_dim": 2, "norm": "euclidean",
 *       "rows": [{"label": "1", "a": [1, 1], "b": 1}, ...]}
 *
 *  Unknown keys are rejected at every level.
 */
#ifndef ERRBOUND_CLI_SYSTEM_IO_HPP
#define ERRBOUND_CLI_SYSTEM_IO_HPP

#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "json.hpp"

#include "../convex_model.hpp"
#include "../errors.hpp"

namespace errbound::cli {

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj, const std::set<std::string>& allowed, const std::string& where)
{
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.count(key)) fail(errc::invalid_input, where + ": unknown key '" + key + "'");
    }
}

inline double as_real(const nlohmann::json& v, const std::string& where)
{
    if (!v.is_number()) fail(errc::invalid_input, where + ": expected a number");
    return v.get<double>();
}

} // namespace detail

inline max_affine_system parse_system(const nlohmann::json& doc)
{
    using detail::as_real;
    if (!doc.is_object()) fail(errc::invalid_input, "spec: top level must be an object");
    detail::reject_unknown_keys(doc, {"space_dim", "norm", "rows"}, "spec");
    if (!doc.contains("space_dim") || !doc["space_dim"].is_number_integer()) {
        fail(errc::invalid_input, "spec: space_dim must be an integer");
    }
    const auto dim = doc["space_dim"].get<long long>();
    if (dim < 1) fail(errc::invalid_input, "spec: space_dim must be >= 1");

    norm_kind nk = norm_kind::euclidean;
    if (doc.contains("norm")) {
        if (!doc["norm"].is_string()) fail(errc::invalid_input, "spec: norm must be a string");
        const auto parsed = parse_norm_kind(doc["norm"].get<std::string>());
        if (!parsed) fail(errc::invalid_input, "spec: unknown norm '" + doc["norm"].get<std::string>() + "'");
        nk = *parsed;
    }

    if (!doc.contains("rows") || !doc["rows"].is_array()) fail(errc::invalid_input, "spec: rows must be an array");
    if (doc["rows"].empty()) fail(errc::invalid_input, "spec: rows is empty");
    std::vector<affine_row> rows;
    std::size_t n = 0;
    for (const auto& r : doc["rows"]) {
        const std::string where = "spec: rows[" + std::to_string(n++) + "]";
        if (!r.is_object()) fail(errc::invalid_input, where + ": expected an object");
        detail::reject_unknown_keys(r, {"label", "a", "b"}, where);
        if (!r.contains("label") || !r["label"].is_string()) fail(errc::invalid_input, where + ": label must be a string");
        if (!r.contains("a") || !r["a"].is_array()) fail(errc::invalid_input, where + ": a must be an array");
        if (!r.contains("b")) fail(errc::invalid_input, where + ": missing b");
        if (static_cast<long long>(r["a"].size()) != dim) fail(errc::invalid_input, where + ": a has the wrong length");
        affine_row row;
        row.label = r["label"].get<std::string>();
        row.a.resize(static_cast<Eigen::Index>(dim));
        for (Eigen::Index i = 0; i < row.a.size(); ++i) row.a[i] = as_real(r["a"][static_cast<std::size_t>(i)], where + ".a");
        row.b = as_real(r["b"], where + ".b");
        rows.push_back(std::move(row));
    }
    return max_affine_system(std::move(rows), nk);
}

inline max_affine_system parse_system_text(const std::string& text)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail(errc::invalid_input, std::string("spec: ") + e.what());
    }
    return parse_system(doc);
}

inline max_affine_system load_system(const std::string& path)
{
    std::ifstream in(path);
    if (!in) fail(errc::invalid_input, "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_system_text(buf.str());
}

} // namespace errbound::cli

#endif
