#pragma once

// JSON encodings of ensembles, signals, measurement vectors, witnesses,
// certificates and injectivity reports. Floats are written with 17 significant
// digits so every double round-trips exactly.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "affine_pr/ensemble.hpp"
#include "affine_pr/errors.hpp"
#include "affine_pr/forward_map.hpp"
#include "affine_pr/injectivity.hpp"

namespace affine_pr {

using json = nlohmann::json;

inline constexpr const char* kEnsembleSchema = "affine-pr-1";
inline constexpr const char* kMeasurementSchema = "affine-pr-meas-1";
inline constexpr const char* kSignalSchema = "affine-pr-sig-1";
inline constexpr const char* kWitnessSchema = "affine-pr-witness-1";
inline constexpr const char* kCertificateSchema = "affine-pr-cert-1";
inline constexpr const char* kReportSchema = "affine-pr-report-1";

inline std::string format_double(double v) {
    if (!std::isfinite(v)) throw PreconditionError("cannot encode a non-finite float");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline void emit(const json& j, std::string& out, int indent, int depth) {
    auto newline = [&](int level) {
        if (indent < 0) return;
        out += '\n';
        out.append(static_cast<std::size_t>(indent * level), ' ');
    };
    switch (j.type()) {
        case json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += '{';
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ',';
                first = false;
                newline(depth + 1);
                out += json(it.key()).dump();
                out += indent < 0 ? ":" : ": ";
                emit(it.value(), out, indent, depth + 1);
            }
            newline(depth);
            out += '}';
            return;
        }
        case json::value_t::array: {
            // Arrays of scalars stay on one line.
            const bool flat = std::all_of(j.begin(), j.end(), [](const json& v) { return v.is_primitive(); });
            out += '[';
            bool first = true;
            for (const auto& v : j) {
                if (!first) out += flat && indent >= 0 ? ", " : ",";
                first = false;
                if (!flat) newline(depth + 1);
                emit(v, out, indent, depth + 1);
            }
            if (!flat && !j.empty()) newline(depth);
            out += ']';
            return;
        }
        case json::value_t::number_float: out += format_double(j.get<double>()); return;
        default: out += j.dump(); return;
    }
}

}  // namespace detail

/// Serializes with 17-significant-digit floats; indent < 0 gives a single line.
inline std::string dump_json(const json& j, int indent = 2) {
    std::string out;
    detail::emit(j, out, indent, 0);
    if (indent >= 0) out += '\n';
    return out;
}

// ---------------------------------------------------------------------------
// Encoding

inline json scalar_json(cdouble v, FieldTag field) {
    if (field == FieldTag::Real) return v.real();
    return json::array({v.real(), v.imag()});
}

inline json vector_json(const CVec& v, FieldTag field) {
    json a = json::array();
    for (const auto& s : v) a.push_back(scalar_json(s, field));
    return a;
}

inline json matrix_json(const CMatrix& m, FieldTag field) {
    json a = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t k = 0; k < m.cols(); ++k) row.push_back(scalar_json(m(i, k), field));
        a.push_back(std::move(row));
    }
    return a;
}

inline json meta_json(const ConstructionMeta& meta, FieldTag field) {
    json j;
    j["kind"] = to_string(meta.kind);
    j["epsilon_dr"] = meta.epsilon_dr;
    if (meta.delta) j["delta"] = *meta.delta;
    json blocks = json::array();
    for (const auto& b : meta.blocks) {
        json offs = json::array();
        for (const auto& o : b.offsets) offs.push_back(vector_json(o, field));
        blocks.push_back({{"start", b.start},
                          {"size", b.size},
                          {"first_pair", b.first_pair},
                          {"pair_count", b.pair_count},
                          {"offsets", std::move(offs)}});
    }
    j["blocks"] = std::move(blocks);
    return j;
}

inline json ensemble_json(const Ensemble& e) {
    json j;
    j["schema"] = kEnsembleSchema;
    j["field"] = to_string(e.field);
    j["d"] = e.d;
    j["r"] = e.r;
    json ms = json::array();
    for (const auto& p : e.pairs) ms.push_back({{"M", matrix_json(p.M, e.field)}, {"b", vector_json(p.b, e.field)}});
    j["measurements"] = std::move(ms);
    if (e.meta) j["meta"] = meta_json(*e.meta, e.field);
    return j;
}

inline json signal_json(const Signal& x) {
    return {{"schema", kSignalSchema}, {"field", to_string(x.field)}, {"x", vector_json(x.entries, x.field)}};
}

inline json measurements_json(const MeasurementVector& y) {
    json a = json::array();
    for (double v : y) a.push_back(v);
    return {{"schema", kMeasurementSchema}, {"y", std::move(a)}};
}

inline json witness_json(const CollisionWitness& w) {
    return {{"schema", kWitnessSchema},
            {"field", to_string(w.x.field)},
            {"x", vector_json(w.x.entries, w.x.field)},
            {"y", vector_json(w.y.entries, w.y.field)},
            {"gap", w.gap},
            {"separation", w.separation},
            {"scale", w.scale}};
}

inline json certificate_json(const Certificate& c) {
    // Q is Hermitian but generally complex even for a Real ensemble's field tag only
    // when it is invalid, so it is always stored with explicit imaginary parts.
    return {{"schema", kCertificateSchema},
            {"field", to_string(c.field)},
            {"d", c.Q.rows() - 1},
            {"Q", matrix_json(c.Q, FieldTag::Complex)}};
}

inline json certificate_report_json(const CertificateReport& r) {
    json t = json::array();
    for (double v : r.trace_values) t.push_back(v);
    return {{"all_pass", r.all_pass()},
            {"hermitian", r.hermitian},
            {"corner_zero", r.corner_zero},
            {"rank_le_2", r.rank_le_2},
            {"annihilated", r.annihilated},
            {"normalized", r.normalized},
            {"asymmetry", r.asymmetry},
            {"corner", r.corner},
            {"third_eigenvalue", r.third_eigenvalue},
            {"normalization_error", r.normalization},
            {"trace_values", std::move(t)},
            {"failing_pairs", r.failing_pairs}};
}

inline json report_json(const InjectivityReport& r) {
    json j;
    j["schema"] = kReportSchema;
    j["verdict"] = to_string(r.verdict);
    j["method"] = r.method;
    j["minimal_count"] = r.minimal_count;
    j["restarts_used"] = r.restarts_used;
    j["witness_tol"] = r.witness_tol;
    if (std::isfinite(r.min_margin)) {
        j["min_margin"] = r.min_margin;
        j["min_margin_relative"] = r.min_margin_relative;
    }
    j["certified_injective"] = r.certified_injective;
    if (r.witness) j["witness"] = witness_json(*r.witness);
    if (r.certificate) j["certificate"] = certificate_json(*r.certificate);
    if (r.certificate_report) j["certificate_report"] = certificate_report_json(*r.certificate_report);
    return j;
}

// ---------------------------------------------------------------------------
// Decoding. Every failure names the JSON path of the offending value.

namespace detail {

inline const json& member(const json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) throw ParseError(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(path, "missing key \"" + key + "\"");
    return *it;
}

inline double number(const json& j, const std::string& path) {
    if (!j.is_number()) throw ParseError(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ParseError(path, "non-finite number");
    return v;
}

inline std::size_t count(const json& j, const std::string& path) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
        throw ParseError(path, "expected a non-negative integer");
    return j.get<std::size_t>();
}

inline cdouble scalar(const json& j, FieldTag field, const std::string& path) {
    if (j.is_number()) return {number(j, path), 0.0};
    if (j.is_array() && j.size() == 2) {
        const cdouble v{number(j[0], path + "[0]"), number(j[1], path + "[1]")};
        if (field == FieldTag::Real && v.imag() != 0.0)
            throw ParseError(path, "real ensemble requires a zero imaginary part");
        return v;
    }
    throw ParseError(path, "expected a number or [re, im]");
}

inline CVec vector(const json& j, FieldTag field, const std::string& path, std::optional<std::size_t> len = {}) {
    if (!j.is_array()) throw ParseError(path, "expected an array");
    if (len && j.size() != *len)
        throw ParseError(path, "expected " + std::to_string(*len) + " entries, got " + std::to_string(j.size()));
    CVec v;
    for (std::size_t i = 0; i < j.size(); ++i) v.push_back(scalar(j[i], field, path + "[" + std::to_string(i) + "]"));
    return v;
}

inline CMatrix matrix(const json& j, FieldTag field, std::size_t rows, std::size_t cols, const std::string& path) {
    if (!j.is_array()) throw ParseError(path, "expected an array of rows");
    if (j.size() != rows)
        throw ParseError(path, "expected " + std::to_string(rows) + " rows, got " + std::to_string(j.size()));
    CMatrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        const std::string rp = path + "[" + std::to_string(i) + "]";
        const CVec row = vector(j[i], field, rp, cols);
        for (std::size_t k = 0; k < cols; ++k) m(i, k) = row[k];
    }
    return m;
}

inline FieldTag field_tag(const json& j, const std::string& path) {
    if (j == "real") return FieldTag::Real;
    if (j == "complex") return FieldTag::Complex;
    throw ParseError(path, "field must be \"real\" or \"complex\"");
}

inline void expect_schema(const json& j, const char* schema) {
    const json& s = member(j, "schema", "$");
    if (!s.is_string()) throw ParseError("$.schema", "expected a string");
    if (s.get<std::string>() != schema)
        throw SchemaVersionError("unsupported schema \"" + s.get<std::string>() + "\", expected \"" + schema + "\"");
}

inline ConstructionKind kind_tag(const json& j, const std::string& path) {
    for (auto k : {ConstructionKind::Tight, ConstructionKind::Perturbed, ConstructionKind::Random,
                   ConstructionKind::Custom})
        if (j == to_string(k)) return k;
    throw ParseError(path, "unknown construction kind");
}

}  // namespace detail

inline json parse_json_text(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& err) {
        throw ParseError("byte " + std::to_string(err.byte), err.what());
    }
}

inline Ensemble ensemble_from_json(const json& j) {
    using namespace detail;
    expect_schema(j, kEnsembleSchema);
    Ensemble e;
    e.field = field_tag(member(j, "field", "$"), "$.field");
    e.d = count(member(j, "d", "$"), "$.d");
    e.r = count(member(j, "r", "$"), "$.r");
    if (e.d < 1) throw ParseError("$.d", "d must be >= 1");
    if (e.r < 1) throw ParseError("$.r", "r must be >= 1");
    const json& ms = member(j, "measurements", "$");
    if (!ms.is_array()) throw ParseError("$.measurements", "expected an array");
    for (std::size_t k = 0; k < ms.size(); ++k) {
        const std::string p = "$.measurements[" + std::to_string(k) + "]";
        MeasurementPair pair;
        pair.M = matrix(member(ms[k], "M", p), e.field, e.d, e.r, p + ".M");
        pair.b = vector(member(ms[k], "b", p), e.field, p + ".b", e.r);
        e.pairs.push_back(std::move(pair));
    }
    if (auto it = j.find("meta"); it != j.end() && !it->is_null()) {
        const json& mj = *it;
        ConstructionMeta meta;
        meta.kind = kind_tag(member(mj, "kind", "$.meta"), "$.meta.kind");
        if (auto eps = mj.find("epsilon_dr"); eps != mj.end()) meta.epsilon_dr = static_cast<int>(count(*eps, "$.meta.epsilon_dr"));
        if (auto dl = mj.find("delta"); dl != mj.end() && !dl->is_null()) meta.delta = number(*dl, "$.meta.delta");
        if (auto bl = mj.find("blocks"); bl != mj.end()) {
            if (!bl->is_array()) throw ParseError("$.meta.blocks", "expected an array");
            for (std::size_t t = 0; t < bl->size(); ++t) {
                const std::string p = "$.meta.blocks[" + std::to_string(t) + "]";
                const json& bj = (*bl)[t];
                BlockLayout b;
                b.start = count(member(bj, "start", p), p + ".start");
                b.size = count(member(bj, "size", p), p + ".size");
                b.first_pair = count(member(bj, "first_pair", p), p + ".first_pair");
                b.pair_count = count(member(bj, "pair_count", p), p + ".pair_count");
                const json& oj = member(bj, "offsets", p);
                if (!oj.is_array()) throw ParseError(p + ".offsets", "expected an array");
                for (std::size_t k = 0; k < oj.size(); ++k)
                    b.offsets.push_back(vector(oj[k], e.field, p + ".offsets[" + std::to_string(k) + "]", b.size));
                meta.blocks.push_back(std::move(b));
            }
        }
        e.meta = std::move(meta);
    }
    return e;
}

inline Signal signal_from_json(const json& j) {
    detail::expect_schema(j, kSignalSchema);
    Signal s;
    s.field = detail::field_tag(detail::member(j, "field", "$"), "$.field");
    s.entries = detail::vector(detail::member(j, "x", "$"), s.field, "$.x");
    return s;
}

inline MeasurementVector measurements_from_json(const json& j) {
    detail::expect_schema(j, kMeasurementSchema);
    const json& a = detail::member(j, "y", "$");
    if (!a.is_array()) throw ParseError("$.y", "expected an array");
    MeasurementVector y;
    for (std::size_t k = 0; k < a.size(); ++k) y.push_back(detail::number(a[k], "$.y[" + std::to_string(k) + "]"));
    return y;
}

/// Reads x and y; gap, separation and scale are recomputed against `e`.
inline CollisionWitness witness_from_json(const json& j, const Ensemble& e) {
    detail::expect_schema(j, kWitnessSchema);
    const FieldTag f = detail::field_tag(detail::member(j, "field", "$"), "$.field");
    const Signal x{f, detail::vector(detail::member(j, "x", "$"), f, "$.x", e.d)};
    const Signal y{f, detail::vector(detail::member(j, "y", "$"), f, "$.y", e.d)};
    if (f != e.field) throw ParseError("$.field", "witness field does not match the ensemble");
    return make_witness(e, x, y);
}

inline Certificate certificate_from_json(const json& j) {
    detail::expect_schema(j, kCertificateSchema);
    Certificate c;
    c.field = detail::field_tag(detail::member(j, "field", "$"), "$.field");
    const std::size_t d = detail::count(detail::member(j, "d", "$"), "$.d");
    c.Q = detail::matrix(detail::member(j, "Q", "$"), FieldTag::Complex, d + 1, d + 1, "$.Q");
    return c;
}

inline Ensemble parse_ensemble(const std::string& text) { return ensemble_from_json(parse_json_text(text)); }
inline std::string serialize_ensemble(const Ensemble& e) { return dump_json(ensemble_json(e)); }

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path, "cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline json read_json_file(const std::string& path) {
    try {
        return parse_json_text(read_text_file(path));
    } catch (const SchemaVersionError&) {
        throw;
    } catch (const ParseError& err) {
        throw ParseError(path + ": " + err.path(), err.what());
    }
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError(path, "cannot open file for writing");
    out << text;
    if (!out) throw ParseError(path, "write failed");
}

}  // namespace affine_pr
