#include "nlbvp/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace nlbvp::config {

namespace {

struct RawValue {
    std::string text;
    std::size_t line = 0;
};

using Section = std::map<std::string, RawValue>;
using Sections = std::map<std::string, Section>;

std::string trim(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

// Strips '#' comments, but not inside quoted strings.
std::string strip_comment(const std::string& line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        if (line[i] == '#' && !quoted) return line.substr(0, i);
    }
    return line;
}

Sections read_sections(const std::string& text, const std::string& filename) {
    Sections sections;
    std::istringstream in(text);
    std::string raw, current;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ParseError(filename + ": malformed section header", lineno);
            current = trim(line.substr(1, line.size() - 2));
            if (current.empty())
                throw ParseError(filename + ": empty section name", lineno);
            sections[current];
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(filename + ": expected 'key = value'", lineno);
        if (current.empty())
            throw ParseError(filename + ": key outside any [section]", lineno);
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ParseError(filename + ": empty key or value", lineno);
        if (sections[current].count(key))
            throw ParseError(filename + ": duplicate key '" + key + "'", lineno);
        sections[current][key] = {value, lineno};
    }
    return sections;
}

class Reader {
public:
    Reader(Sections sections, std::string filename)
        : sections_(std::move(sections)), filename_(std::move(filename)) {}

    bool has(const std::string& section, const std::string& key) const {
        auto s = sections_.find(section);
        return s != sections_.end() && s->second.count(key) > 0;
    }

    const RawValue& raw(const std::string& section, const std::string& key) const {
        return sections_.at(section).at(key);
    }

    [[noreturn]] void fail(const RawValue& v, const std::string& what) const {
        throw ParseError(filename_ + ": " + what, v.line);
    }

    double number(const std::string& section, const std::string& key) const {
        const RawValue& v = raw(section, key);
        return parse_number(v, v.text);
    }

    int integer(const std::string& section, const std::string& key) const {
        double d = number(section, key);
        int i = static_cast<int>(d);
        if (static_cast<double>(i) != d)
            fail(raw(section, key), "expected an integer for '" + key + "'");
        return i;
    }

    std::string string(const std::string& section, const std::string& key) const {
        const RawValue& v = raw(section, key);
        return parse_string(v, v.text);
    }

    std::vector<std::string> list(const std::string& section, const std::string& key) const {
        const RawValue& v = raw(section, key);
        std::string t = trim(v.text);
        if (t.size() < 2 || t.front() != '[' || t.back() != ']')
            fail(v, "expected a [list] for '" + key + "'");
        std::vector<std::string> items;
        std::string body = t.substr(1, t.size() - 2);
        std::string item;
        bool quoted = false;
        for (char c : body) {
            if (c == '"') quoted = !quoted;
            if (c == ',' && !quoted) {
                items.push_back(trim(item));
                item.clear();
            } else {
                item += c;
            }
        }
        if (!trim(item).empty()) items.push_back(trim(item));
        for (const std::string& s : items)
            if (s.empty()) fail(v, "empty list element in '" + key + "'");
        return items;
    }

    std::vector<double> number_list(const std::string& section, const std::string& key) const {
        std::vector<double> out;
        for (const std::string& item : list(section, key)) out.push_back(parse_number(raw(section, key), item));
        return out;
    }

    std::vector<std::string> string_list(const std::string& section, const std::string& key) const {
        std::vector<std::string> out;
        for (const std::string& item : list(section, key)) out.push_back(parse_string(raw(section, key), item));
        return out;
    }

    double parse_number(const RawValue& context, const std::string& text) const {
        const char* begin = text.c_str();
        char* end = nullptr;
        double d = std::strtod(begin, &end);
        if (end == begin || *end != '\0')
            fail(context, "expected a number, got '" + text + "'");
        return d;
    }

    std::string parse_string(const RawValue& context, const std::string& text) const {
        std::string t = trim(text);
        if (t.size() < 2 || t.front() != '"' || t.back() != '"')
            fail(context, "expected a quoted \"string\", got '" + text + "'");
        return t.substr(1, t.size() - 2);
    }

    expr::Expr expression(const std::string& section, const std::string& key) const {
        const RawValue& v = raw(section, key);
        std::string source = parse_string(v, v.text);
        try {
            return expr::parse(source);
        } catch (const SyntaxError& e) {
            fail(v, std::string("bad expression for '" + key + "': ") + e.what());
        }
    }

private:
    Sections sections_;
    std::string filename_;
};

bool expr_uses_xy(const expr::NodePtr& node) {
    if (!node) return false;
    if (node->kind == expr::Node::Kind::Variable)
        return node->var == expr::Var::X || node->var == expr::Var::Y;
    return expr_uses_xy(node->a) || expr_uses_xy(node->b);
}

}  // namespace

const expr::Expr* ProblemConfig::radial_drift() const {
    if (const auto* radial = std::get_if<fem::RadialDrift>(&drift)) return &radial->alpha;
    return nullptr;
}

void ProblemConfig::validate() const {
    if (kind == DomainKind::Annulus) {
        if (inner_radius.empty() || outer_radius.empty())
            throw InvariantViolation("annulus domain needs inner_radius and outer_radius");
        expr::Bindings env;
        env.lambda(lambda);
        double r1 = inner_radius.eval(env);
        double r2 = outer_radius.eval(env);
        if (!(r1 > 0.0) || !(r2 > r1))
            throw InvalidRadii("annulus radii must satisfy 0 < R1 < R2 at the configured lambda");
    } else {
        if (mesh_path.empty()) throw InvariantViolation("mesh domain needs a mesh_path");
    }
    if (dimension < 2) throw InvariantViolation("dimension must be >= 2");
    if (!(lambda > 0.0)) throw InvalidLambda("lambda must be positive");
    if (components < 2) throw InvariantViolation("need at least two boundary components");
    if (static_cast<int>(b.size()) != components)
        throw InvariantViolation("boundary data count must equal the component count");
    if (static_cast<int>(weights.size()) != components)
        throw InvariantViolation("weight count must equal the component count");
    if (nr < 1 || ntheta < 3) throw InvalidResolution("need nr >= 1 and ntheta >= 3");
    if (refinements < 0 || refinements > 8) throw InvalidResolution("refinements must be in [0, 8]");
    if (n_points < 16) throw InvalidResolution("n_points must be >= 16");
    if (steps != 0 && steps < 2) throw InvariantViolation("sweep steps must be >= 2");
    if (steps != 0 && !(0.0 < lambda_min && lambda_min < lambda_max))
        throw InvariantViolation("sweep range must satisfy 0 < lambda_min < lambda_max");
    if (engine != "fem" && engine != "oracle")
        throw InvariantViolation("engine must be \"fem\" or \"oracle\"");
    if (example < 0 || example > 2) throw InvariantViolation("oracle example must be 0, 1 or 2");
    if (example == 1 && !(example1_g > 0.0))
        throw InvariantViolation("Example 1 needs a positive coupling constant g");
    if (!(kappa > 0.0) || !(kappa < 2.0)) throw InvariantViolation("kappa must lie in (0, 2)");
    if (eps_det && !(*eps_det > 0.0)) throw InvariantViolation("eps_det must be positive");

    if (engine == "oracle") {
        if (kind != DomainKind::Annulus)
            throw InvariantViolation("the oracle engine requires an annulus domain");
        if (components != 2)
            throw InvariantViolation("the oracle engine handles two boundary components");
        if (radial_drift() == nullptr)
            throw InvariantViolation("the oracle engine needs a radial drift (a_r or a radial preset)");
        for (const auto& w : weights)
            if (expr_uses_xy(w.root()))
                throw InvariantViolation("oracle-engine weights must be radial (use r, not x/y)");
        if (expr_uses_xy(h.root()))
            throw InvariantViolation("oracle-engine reaction must be radial (use r, not x/y)");
        if (expr_uses_xy(inner_radius.root()) || expr_uses_xy(outer_radius.root()))
            throw InvariantViolation("radius expressions may reference lambda only");
    }
    if (kind == DomainKind::Annulus && dimension != 2 && engine == "fem")
        throw InvariantViolation("the FEM engine is two-dimensional; use the oracle engine for N >= 3");
}

ProblemConfig parse_config(const std::string& text, const std::string& filename) {
    Reader reader(read_sections(text, filename), filename);
    ProblemConfig cfg;

    // [domain]
    if (reader.has("domain", "kind")) {
        std::string kind = reader.string("domain", "kind");
        if (kind == "annulus") cfg.kind = DomainKind::Annulus;
        else if (kind == "mesh") cfg.kind = DomainKind::Mesh;
        else reader.fail(reader.raw("domain", "kind"), "domain kind must be \"annulus\" or \"mesh\"");
    }
    if (reader.has("domain", "inner_radius")) cfg.inner_radius = reader.expression("domain", "inner_radius");
    if (reader.has("domain", "outer_radius")) cfg.outer_radius = reader.expression("domain", "outer_radius");
    if (reader.has("domain", "mesh_path")) cfg.mesh_path = reader.string("domain", "mesh_path");
    if (reader.has("domain", "dimension")) cfg.dimension = reader.integer("domain", "dimension");
    if (reader.has("domain", "lambda")) cfg.lambda = reader.number("domain", "lambda");

    // [coefficients]
    bool has_preset = reader.has("coefficients", "preset");
    bool has_cartesian = reader.has("coefficients", "a_x") || reader.has("coefficients", "a_y");
    bool has_radial = reader.has("coefficients", "a_r");
    if (has_preset + has_cartesian + has_radial > 1)
        throw InvariantViolation(filename + ": give exactly one of preset, a_x/a_y, or a_r");
    if (has_preset)
        cfg.drift = fem::CoefficientField::drift_preset(reader.string("coefficients", "preset"));
    else if (has_radial)
        cfg.drift = fem::RadialDrift{reader.expression("coefficients", "a_r")};
    else if (has_cartesian) {
        if (!reader.has("coefficients", "a_x") || !reader.has("coefficients", "a_y"))
            throw InvariantViolation(filename + ": a_x and a_y must be given together");
        cfg.drift = fem::CartesianDrift{reader.expression("coefficients", "a_x"),
                                        reader.expression("coefficients", "a_y")};
    }
    if (reader.has("coefficients", "h")) cfg.h = reader.expression("coefficients", "h");

    // [boundary]
    if (reader.has("boundary", "components")) cfg.components = reader.integer("boundary", "components");
    if (reader.has("boundary", "b")) cfg.b = reader.number_list("boundary", "b");
    if (reader.has("boundary", "g")) {
        cfg.weight_sources = reader.string_list("boundary", "g");
        for (const std::string& src : cfg.weight_sources) {
            try {
                cfg.weights.push_back(expr::parse(src));
            } catch (const SyntaxError& e) {
                reader.fail(reader.raw("boundary", "g"), std::string("bad weight expression: ") + e.what());
            }
        }
    }
    if (cfg.b.empty()) cfg.b.assign(static_cast<std::size_t>(cfg.components), 0.0);
    if (cfg.weights.empty())
        for (int i = 0; i < cfg.components; ++i) {
            cfg.weights.push_back(expr::parse("0"));
            cfg.weight_sources.push_back("0");
        }

    // [discretization]
    if (reader.has("discretization", "nr")) cfg.nr = reader.integer("discretization", "nr");
    if (reader.has("discretization", "ntheta")) cfg.ntheta = reader.integer("discretization", "ntheta");
    if (reader.has("discretization", "refinements"))
        cfg.refinements = reader.integer("discretization", "refinements");
    if (reader.has("discretization", "n_points")) cfg.n_points = reader.integer("discretization", "n_points");

    // [sweep]
    if (reader.has("sweep", "lambda_min")) cfg.lambda_min = reader.number("sweep", "lambda_min");
    if (reader.has("sweep", "lambda_max")) cfg.lambda_max = reader.number("sweep", "lambda_max");
    if (reader.has("sweep", "steps")) cfg.steps = reader.integer("sweep", "steps");
    if (reader.has("sweep", "tol")) cfg.tol = reader.number("sweep", "tol");
    if (reader.has("sweep", "engine")) cfg.engine = reader.string("sweep", "engine");

    // [classify]
    if (reader.has("classify", "eps_det")) cfg.eps_det = reader.number("classify", "eps_det");
    if (reader.has("classify", "kappa")) cfg.kappa = reader.number("classify", "kappa");

    // [oracle]
    if (reader.has("oracle", "example")) cfg.example = reader.integer("oracle", "example");
    if (reader.has("oracle", "g")) cfg.example1_g = reader.number("oracle", "g");
    if (reader.has("oracle", "c0")) {
        const RawValue& v = reader.raw("oracle", "c0");
        std::string t = trim(v.text);
        if (!t.empty() && t.front() == '"') {
            if (reader.parse_string(v, t) != "critical")
                reader.fail(v, "c0 must be a number or \"critical\"");
            cfg.c0.reset();
        } else {
            cfg.c0 = reader.parse_number(v, t);
        }
    }

    cfg.validate();
    return cfg;
}

ProblemConfig load_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str(), path);
}

}  // namespace nlbvp::config
