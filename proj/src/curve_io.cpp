#include "purcell/curve_io.hpp"

#include <charconv>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "purcell/errors.hpp"
#include "purcell/number_format.hpp"

namespace purcell {

namespace {

constexpr std::string_view kHeader = "t,gamma_ratio";

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::uint64_t parse_seed(std::string_view text) {
    text = trim(text);
    std::uint64_t v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw ParseError("bad seed '" + std::string(text) + "'");
    }
    return v;
}

void check_scenario(const std::string& s) {
    if (s.find_first_of("\r\n") != std::string::npos) {
        throw DomainError("scenario description must be a single line");
    }
}

}  // namespace

CurveFormat parse_format(std::string_view name) {
    if (name == "csv") return CurveFormat::Csv;
    if (name == "json") return CurveFormat::Json;
    throw ParseError("unknown curve format '" + std::string(name) + "' (expected csv or json)");
}

CurveFormat sniff_format(std::string_view text) {
    for (char c : text) {
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') continue;
        return c == '{' ? CurveFormat::Json : CurveFormat::Csv;
    }
    return CurveFormat::Csv;
}

std::string to_csv(const RateCurve& curve) {
    curve.validate();
    std::string out;
    const auto& meta = curve.metadata;
    if (!meta.scenario.empty()) {
        check_scenario(meta.scenario);
        out += "# scenario: " + meta.scenario + "\n";
    }
    if (meta.seed) out += "# seed: " + std::to_string(*meta.seed) + "\n";
    if (meta.sigma_rel) out += "# sigma_rel: " + format_number(*meta.sigma_rel) + "\n";
    out += kHeader;
    out += '\n';
    for (const auto& s : curve.samples) {
        out += format_number(s.t);
        out += ',';
        out += format_number(s.ratio);
        out += '\n';
    }
    return out;
}

RateCurve from_csv(std::string_view text) {
    RateCurve curve;
    bool header_seen = false;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

        if (!header_seen) {
            if (line.starts_with("#")) {
                auto body = line.substr(1);
                if (!body.empty() && body.front() == ' ') body.remove_prefix(1);
                const auto colon = body.find(':');
                if (colon == std::string_view::npos) continue;
                const auto key = trim(body.substr(0, colon));
                auto value = body.substr(colon + 1);
                if (!value.empty() && value.front() == ' ') value.remove_prefix(1);
                if (key == "scenario") curve.metadata.scenario = std::string(value);
                else if (key == "seed") curve.metadata.seed = parse_seed(value);
                else if (key == "sigma_rel") curve.metadata.sigma_rel = parse_number(value);
                continue;
            }
            if (trim(line).empty()) continue;
            if (trim(line) != kHeader) {
                throw ParseError("line " + std::to_string(line_no) + ": expected header '" +
                                 std::string(kHeader) + "'");
            }
            header_seen = true;
            continue;
        }

        if (trim(line).empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos) {
            throw ParseError("line " + std::to_string(line_no) + ": expected two columns");
        }
        try {
            curve.samples.push_back({parse_number(line.substr(0, comma)), parse_number(line.substr(comma + 1))});
        } catch (const ParseError& e) {
            throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (!header_seen) throw ParseError("missing CSV header '" + std::string(kHeader) + "'");
    try {
        curve.validate();
    } catch (const DomainError& e) {
        throw ParseError(e.what());
    }
    return curve;
}

std::string to_json(const RateCurve& curve) {
    curve.validate();
    check_scenario(curve.metadata.scenario);
    nlohmann::json meta = nlohmann::json::object();
    meta["scenario"] = curve.metadata.scenario;
    if (curve.metadata.seed) meta["seed"] = *curve.metadata.seed;
    if (curve.metadata.sigma_rel) meta["sigma_rel"] = *curve.metadata.sigma_rel;
    nlohmann::json samples = nlohmann::json::array();
    for (const auto& s : curve.samples) samples.push_back({{"t", s.t}, {"gamma_ratio", s.ratio}});
    const nlohmann::json doc = {{"metadata", meta}, {"samples", samples}};
    return doc.dump(2) + "\n";
}

RateCurve from_json(std::string_view text) {
    RateCurve curve;
    try {
        const auto doc = nlohmann::json::parse(text);
        if (!doc.is_object() || !doc.contains("samples")) throw ParseError("JSON curve needs a 'samples' array");
        for (const auto& [key, _] : doc.items()) {
            if (key != "metadata" && key != "samples") throw ParseError("unknown JSON curve key '" + key + "'");
        }
        if (doc.contains("metadata")) {
            const auto& meta = doc.at("metadata");
            for (const auto& [key, value] : meta.items()) {
                if (key == "scenario") curve.metadata.scenario = value.get<std::string>();
                else if (key == "seed") curve.metadata.seed = value.get<std::uint64_t>();
                else if (key == "sigma_rel") curve.metadata.sigma_rel = value.get<double>();
                else throw ParseError("unknown metadata key '" + key + "'");
            }
        }
        for (const auto& s : doc.at("samples")) {
            curve.samples.push_back({s.at("t").get<double>(), s.at("gamma_ratio").get<double>()});
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed JSON curve: ") + e.what());
    }
    try {
        curve.validate();
    } catch (const DomainError& e) {
        throw ParseError(e.what());
    }
    return curve;
}

void export_curve(std::ostream& os, const RateCurve& curve, CurveFormat format) {
    os << (format == CurveFormat::Csv ? to_csv(curve) : to_json(curve));
    if (!os) throw Error("failed to write curve");
}

RateCurve import_curve(std::istream& is) {
    const std::string text(std::istreambuf_iterator<char>(is), {});
    if (is.bad()) throw Error("failed to read curve");
    return sniff_format(text) == CurveFormat::Json ? from_json(text) : from_csv(text);
}

}  // namespace purcell
