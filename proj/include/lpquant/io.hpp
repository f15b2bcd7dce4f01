#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "core.hpp"
#include "simple_function.hpp"
#include "space.hpp"

namespace lpquant {

/// All floating-point output at 17 significant digits, enough for doubles
/// to round-trip bit-exactly.
inline std::string fmt_double(double v) {
    detail::check(std::isfinite(v), "fmt_double: non-finite value");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Streaming JSON writer: two-space indentation, objects and arrays one
/// item per line, except scalar arrays (vectors, assignments, trace pairs)
/// which stay on one line. Reports are emitted through this writer so equal
/// runs produce byte-identical output.
class JsonWriter {
public:
    const std::string& str() const { return out_; }

    JsonWriter& begin_object() {
        item();
        out_ += '{';
        stack_.push_back({true, 0});
        return *this;
    }
    JsonWriter& end_object() { return close('}'); }
    JsonWriter& begin_array() {
        item();
        out_ += '[';
        stack_.push_back({false, 0});
        return *this;
    }
    JsonWriter& end_array() { return close(']'); }

    JsonWriter& key(std::string_view k) {
        item();
        quote(k);
        out_ += ": ";
        pending_value_ = true;
        return *this;
    }

    JsonWriter& value(double v) { return raw(fmt_double(v)); }
    JsonWriter& value(int v) { return raw(std::to_string(v)); }
    JsonWriter& value(std::uint64_t v) { return raw(std::to_string(v)); }
    JsonWriter& value(bool v) { return raw(v ? "true" : "false"); }
    JsonWriter& value(std::string_view v) {
        item();
        quote(v);
        return *this;
    }
    JsonWriter& value(const char* v) { return value(std::string_view(v)); }
    JsonWriter& null() { return raw("null"); }

    JsonWriter& value(const Vec& v) {
        item();
        out_ += '[';
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) out_ += ", ";
            out_ += fmt_double(v[i]);
        }
        out_ += ']';
        return *this;
    }
    JsonWriter& value(const std::vector<int>& v) {
        item();
        out_ += '[';
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) out_ += ", ";
            out_ += std::to_string(v[i]);
        }
        out_ += ']';
        return *this;
    }
    JsonWriter& pair_value(int a, double b) {
        item();
        out_ += '[';
        out_ += std::to_string(a);
        out_ += ", ";
        out_ += fmt_double(b);
        out_ += ']';
        return *this;
    }

private:
    struct Frame {
        bool object;
        int items;
    };

    void item() {
        if (pending_value_) {
            pending_value_ = false;
            return;
        }
        if (stack_.empty()) return;
        if (stack_.back().items++) out_ += ',';
        out_ += '\n';
        out_.append(2 * stack_.size(), ' ');
    }
    JsonWriter& raw(const std::string& s) {
        item();
        out_ += s;
        return *this;
    }
    JsonWriter& close(char c) {
        detail::check(!stack_.empty(), "JsonWriter: unbalanced close");
        const Frame f = stack_.back();
        stack_.pop_back();
        if (f.items) {
            out_ += '\n';
            out_.append(2 * stack_.size(), ' ');
        }
        out_ += c;
        return *this;
    }
    void quote(std::string_view s) {
        out_ += '"';
        for (char c : s) {
            switch (c) {
                case '"': out_ += "\\\""; break;
                case '\\': out_ += "\\\\"; break;
                case '\n': out_ += "\\n"; break;
                case '\t': out_ += "\\t"; break;
                case '\r': out_ += "\\r"; break;
                default: out_ += c;
            }
        }
        out_ += '"';
    }

    std::string out_;
    std::vector<Frame> stack_;
    bool pending_value_ = false;
};

inline void write_space(JsonWriter& w, const MeasureSpace& sp) {
    w.begin_object();
    w.key("dim").value(sp.dim());
    w.key("infinite_mass").value(sp.infinite_mass());
    w.key("atoms").begin_array();
    for (const Atom& a : sp.atoms()) {
        w.begin_object();
        w.key("w").value(a.weight);
        w.key("f").value(a.value);
        w.end_object();
    }
    w.end_array();
    w.end_object();
}

inline void write_simplefn(JsonWriter& w, const SimpleFunction& h) {
    w.begin_object();
    w.key("centers").begin_array();
    for (const Vec& c : h.centers) w.value(c);
    w.end_array();
    w.key("assignment").value(h.assignment);
    w.key("background");
    if (h.background_center)
        w.value(*h.background_center);
    else
        w.null();
    w.end_object();
}

inline std::string to_json(const MeasureSpace& sp) {
    JsonWriter w;
    write_space(w, sp);
    return w.str();
}

inline std::string to_json(const SimpleFunction& h) {
    JsonWriter w;
    write_simplefn(w, h);
    return w.str();
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    detail::check(bool(in), "cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    detail::check(bool(out), "cannot write file: " + path);
    out << content;
    detail::check(bool(out), "write failed: " + path);
}

inline MeasureSpace space_from_json(const nlohmann::json& j) {
    try {
        detail::check(j.is_object() && j.contains("dim") &&
                          j.contains("atoms"),
                      "expected {\"dim\", \"infinite_mass\", \"atoms\"}");
        const int dim = j.at("dim").get<int>();
        const bool infinite = j.value("infinite_mass", false);
        std::vector<Atom> atoms;
        for (const auto& ja : j.at("atoms")) {
            Atom a;
            a.weight = ja.at("w").get<double>();
            a.value = ja.at("f").get<Vec>();
            atoms.push_back(std::move(a));
        }
        return MeasureSpace::load(std::move(atoms), dim, infinite);
    } catch (const nlohmann::json::exception& e) {
        throw error(std::string("malformed space file: ") + e.what());
    }
}

inline MeasureSpace space_from_csv(const std::string& text) {
    std::vector<Atom> atoms;
    int dim = -1;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos || line[start] == '#') continue;
        std::vector<double> nums;
        std::istringstream row(line);
        std::string tok;
        while (std::getline(row, tok, ',')) {
            try {
                std::size_t used = 0;
                const double v = std::stod(tok, &used);
                while (used < tok.size() &&
                       (tok[used] == ' ' || tok[used] == '\t' ||
                        tok[used] == '\r'))
                    ++used;
                detail::check(used == tok.size(), "trailing characters");
                nums.push_back(v);
            } catch (const std::exception&) {
                throw error("malformed space file: line " +
                            std::to_string(lineno) + ": bad number '" + tok +
                            "'");
            }
        }
        if (dim < 0) dim = static_cast<int>(nums.size()) - 1;
        detail::check(static_cast<int>(nums.size()) == dim + 1,
                      "malformed space file: line " + std::to_string(lineno) +
                          ": expected " + std::to_string(dim + 1) +
                          " fields (weight, then " + std::to_string(dim) +
                          " coordinates)");
        Atom a;
        a.weight = nums[0];
        a.value.assign(nums.begin() + 1, nums.end());
        atoms.push_back(std::move(a));
    }
    detail::check(dim >= 1, "malformed space file: no data rows");
    return MeasureSpace::load(std::move(atoms), dim, false);
}

inline MeasureSpace load_space(const std::string& path) {
    const std::size_t dot = path.find_last_of('.');
    const std::string ext =
        dot == std::string::npos ? "" : path.substr(dot + 1);
    const std::string text = read_file(path);
    if (ext == "json") {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw error(std::string("malformed space file: ") + e.what());
        }
        return space_from_json(j);
    }
    if (ext == "csv") return space_from_csv(text);
    throw error("unsupported space file extension: '" + ext +
                "' (expected .json or .csv)");
}

inline SimpleFunction simplefn_from_json(const nlohmann::json& j) {
    try {
        const nlohmann::json& src =
            j.is_object() && j.contains("best") ? j.at("best") : j;
        SimpleFunction h;
        for (const auto& jc : src.at("centers"))
            h.centers.push_back(jc.get<Vec>());
        h.assignment = src.at("assignment").get<std::vector<int>>();
        if (src.contains("background") && !src.at("background").is_null())
            h.background_center = src.at("background").get<int>();
        return h;
    } catch (const nlohmann::json::exception& e) {
        throw error(std::string("malformed function file: ") + e.what());
    }
}

inline SimpleFunction load_simplefn(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw error(std::string("malformed function file: ") + e.what());
    }
    return simplefn_from_json(j);
}

}  // namespace lpquant
