#include "llbar/config.hpp"

#include "llbar/errors.hpp"
#include "llbar/expr.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace llbar {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos)
        return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size())
            throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw config_error("invalid value for '" + key + "': '" + value + "' is not a number");
    }
}

int parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(value, &used);
        if (used != value.size())
            throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw config_error("invalid value for '" + key + "': '" + value + "' is not an integer");
    }
}

bool parse_flag(const std::string& key, const std::string& value) {
    if (value == "on" || value == "true" || value == "1")
        return true;
    if (value == "off" || value == "false" || value == "0")
        return false;
    throw config_error("invalid value for '" + key + "': expected on/off");
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> parts;
    std::string token;
    std::istringstream in(value);
    while (std::getline(in, token, ','))
        parts.push_back(trim(token));
    return parts;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct PresetExprs {
    const char* x;
    const char* y;
    const char* z;
};

PresetExprs preset_exprs(InitialKind kind) {
    switch (kind) {
    case InitialKind::sim1:
        return {"cos(2*pi*x)", "sin(2*pi*y)", "2*cos(2*pi*x)*sin(2*pi*y)"};
    case InitialKind::sim2:
        return {"-2*y*cos(2*pi*x)", "4*x^2*sin(2*pi*y)", "2*cos(2*pi*x)*sin(2*pi*y)"};
    default:
        return {"0", "0", "0"};
    }
}

void apply_preset(Config& cfg, const std::string& value) {
    if (value == "sim1") {
        cfg.physics.lambda_e = 1.0;
        cfg.physics.lambda_r = 4.0;
        cfg.physics.gamma = 10.0;
        cfg.physics.kappa = 2.0;
        cfg.physics.mu = 1.0;
        cfg.physics.beta = -0.1;
        cfg.physics.e_axis = {0.0, 0.0, 1.0};
        cfg.dt = 2.5e-3;
        cfg.t_end = 0.5;
        cfg.initial = InitialKind::sim1;
    } else if (value == "sim2") {
        cfg.physics.lambda_e = 0.001;
        cfg.physics.lambda_r = 4.0;
        cfg.physics.gamma = 5.0;
        cfg.physics.kappa = 3.0;
        cfg.physics.mu = -1.0;
        cfg.physics.beta = 0.2;
        cfg.physics.e_axis = {0.0, 1.0, 0.0};
        cfg.dt = 2.5e-3;
        cfg.t_end = 0.5;
        cfg.initial = InitialKind::sim2;
    } else {
        throw config_error("invalid value for 'preset': expected sim1 or sim2");
    }
}

void assign(Config& cfg, const std::string& key, const std::string& value) {
    if (key == "preset") {
        apply_preset(cfg, value);
    } else if (key == "lambda_r") {
        cfg.physics.lambda_r = parse_double(key, value);
    } else if (key == "lambda_e") {
        cfg.physics.lambda_e = parse_double(key, value);
    } else if (key == "gamma") {
        cfg.physics.gamma = parse_double(key, value);
    } else if (key == "kappa") {
        cfg.physics.kappa = parse_double(key, value);
    } else if (key == "mu") {
        cfg.physics.mu = parse_double(key, value);
    } else if (key == "beta") {
        cfg.physics.beta = parse_double(key, value);
    } else if (key == "e_axis") {
        const auto parts = split_list(value);
        if (parts.size() != 3)
            throw config_error("invalid value for 'e_axis': expected three comma-separated reals");
        Vec3 e;
        for (int i = 0; i < 3; ++i)
            e[i] = parse_double(key, parts[i]);
        if (std::abs(norm2(e) - 1.0) > 1e-12)
            throw config_error("e_axis must be a unit vector (norm deviates by more than 1e-12)");
        cfg.physics.e_axis = e;
    } else if (key == "dim") {
        cfg.dim = parse_int(key, value);
    } else if (key == "divisions") {
        cfg.divisions = parse_int(key, value);
    } else if (key == "dt") {
        cfg.dt = parse_double(key, value);
    } else if (key == "t_end") {
        cfg.t_end = parse_double(key, value);
    } else if (key == "scheme") {
        if (value == "euler")
            cfg.scheme = SchemeKind::euler;
        else if (value == "euler_bloch")
            cfg.scheme = SchemeKind::euler_bloch;
        else if (value == "cn")
            cfg.scheme = SchemeKind::cn;
        else
            throw config_error("invalid value for 'scheme': expected euler, euler_bloch or cn");
    } else if (key == "newton_tol") {
        cfg.newton_tol = parse_double(key, value);
    } else if (key == "newton_max_iter") {
        cfg.newton_max_iter = parse_int(key, value);
    } else if (key == "linear_tol") {
        cfg.linear_tol = parse_double(key, value);
    } else if (key == "linear_max_iter") {
        cfg.linear_max_iter = parse_int(key, value);
    } else if (key == "first_step_substeps") {
        cfg.first_step_substeps = parse_int(key, value);
    } else if (key == "cn_first_beta") {
        cfg.cn_first_beta = parse_flag(key, value);
    } else if (key == "initial") {
        if (value == "zero")
            cfg.initial = InitialKind::zero;
        else if (value == "sim1")
            cfg.initial = InitialKind::sim1;
        else if (value == "sim2")
            cfg.initial = InitialKind::sim2;
        else if (value == "expr")
            cfg.initial = InitialKind::expr;
        else
            throw config_error("invalid value for 'initial': expected zero, sim1, sim2 or expr");
    } else if (key == "init_x") {
        cfg.init_x = value;
    } else if (key == "init_y") {
        cfg.init_y = value;
    } else if (key == "init_z") {
        cfg.init_z = value;
    } else if (key == "initial_projection") {
        if (value == "ritz")
            cfg.initial_projection = InitialProjection::ritz;
        else if (value == "nodal")
            cfg.initial_projection = InitialProjection::nodal;
        else
            throw config_error("invalid value for 'initial_projection': expected ritz or nodal");
    } else if (key == "csv_path") {
        cfg.csv_path = value;
    } else if (key == "vtk_dir") {
        cfg.vtk_dir = value;
    } else if (key == "snapshot_every") {
        cfg.snapshot_every = parse_int(key, value);
    } else if (key == "levels") {
        cfg.levels.clear();
        if (!value.empty())
            for (const auto& p : split_list(value))
                cfg.levels.push_back(parse_int(key, p));
    } else if (key == "epsilons") {
        cfg.epsilons.clear();
        if (!value.empty())
            for (const auto& p : split_list(value))
                cfg.epsilons.push_back(parse_double(key, p));
    } else {
        throw config_error("unknown key '" + key + "'");
    }
}

void finalize(Config& cfg, const std::set<std::string>& assigned) {
    const bool preset = assigned.count("preset") > 0;
    const char* required[] = {"lambda_r", "lambda_e", "gamma", "kappa", "mu",
                              "beta",     "dt",       "t_end", "initial"};
    if (!preset) {
        for (const char* key : required)
            if (assigned.count(key) == 0)
                throw config_error("missing required key '" + std::string(key) + "'");
    }

    cfg.physics.validate();
    if (cfg.dim != 1 && cfg.dim != 2)
        throw config_error("dim must be 1 or 2");
    if (cfg.divisions < 2)
        throw config_error("divisions must be >= 2");
    if (!(cfg.dt > 0.0))
        throw config_error("dt must be > 0");
    if (!(cfg.t_end >= cfg.dt))
        throw config_error("t_end must be >= dt");
    if (cfg.snapshot_every < 0)
        throw config_error("snapshot_every must be >= 0");
    cfg.scheme_config().validate();

    if (cfg.initial == InitialKind::expr) {
        if (cfg.init_x.empty() || cfg.init_y.empty() || cfg.init_z.empty())
            throw config_error("initial=expr requires init_x, init_y and init_z");
        Expression::parse(cfg.init_x);
        Expression::parse(cfg.init_y);
        Expression::parse(cfg.init_z);
    }
}

} // namespace

SchemeConfig Config::scheme_config() const {
    SchemeConfig sc;
    sc.k = dt;
    sc.scheme = scheme;
    sc.newton_tol = newton_tol;
    sc.newton_max_iter = newton_max_iter;
    sc.linear_tol = linear_tol;
    sc.linear_max_iter = linear_max_iter;
    sc.first_step_substeps = first_step_substeps;
    sc.cn_first_beta = cn_first_beta;
    return sc;
}

Config parse_config_text(const std::string& text) {
    Config cfg;
    std::set<std::string> assigned;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw config_error("line " + std::to_string(lineno) + ": empty key");
        assign(cfg, key, value);
        assigned.insert(key);
    }
    finalize(cfg, assigned);
    return cfg;
}

Config parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw io_error("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

void apply_override(Config& cfg, const std::string& key_value) {
    const auto eq = key_value.find('=');
    if (eq == std::string::npos)
        throw config_error("override '" + key_value + "': expected key=value");
    assign(cfg, trim(key_value.substr(0, eq)), trim(key_value.substr(eq + 1)));
}

std::string serialize_config(const Config& cfg) {
    std::ostringstream out;
    out << "lambda_r = " << fmt(cfg.physics.lambda_r) << "\n";
    out << "lambda_e = " << fmt(cfg.physics.lambda_e) << "\n";
    out << "gamma = " << fmt(cfg.physics.gamma) << "\n";
    out << "kappa = " << fmt(cfg.physics.kappa) << "\n";
    out << "mu = " << fmt(cfg.physics.mu) << "\n";
    out << "beta = " << fmt(cfg.physics.beta) << "\n";
    out << "e_axis = " << fmt(cfg.physics.e_axis[0]) << "," << fmt(cfg.physics.e_axis[1]) << ","
        << fmt(cfg.physics.e_axis[2]) << "\n";
    out << "dim = " << cfg.dim << "\n";
    out << "divisions = " << cfg.divisions << "\n";
    out << "dt = " << fmt(cfg.dt) << "\n";
    out << "t_end = " << fmt(cfg.t_end) << "\n";
    out << "scheme = " << scheme_name(cfg.scheme) << "\n";
    out << "newton_tol = " << fmt(cfg.newton_tol) << "\n";
    out << "newton_max_iter = " << cfg.newton_max_iter << "\n";
    out << "linear_tol = " << fmt(cfg.linear_tol) << "\n";
    out << "linear_max_iter = " << cfg.linear_max_iter << "\n";
    out << "first_step_substeps = " << cfg.first_step_substeps << "\n";
    out << "cn_first_beta = " << (cfg.cn_first_beta ? "on" : "off") << "\n";
    switch (cfg.initial) {
    case InitialKind::zero: out << "initial = zero\n"; break;
    case InitialKind::sim1: out << "initial = sim1\n"; break;
    case InitialKind::sim2: out << "initial = sim2\n"; break;
    case InitialKind::expr: out << "initial = expr\n"; break;
    }
    out << "init_x = " << cfg.init_x << "\n";
    out << "init_y = " << cfg.init_y << "\n";
    out << "init_z = " << cfg.init_z << "\n";
    out << "initial_projection = "
        << (cfg.initial_projection == InitialProjection::ritz ? "ritz" : "nodal") << "\n";
    out << "csv_path = " << cfg.csv_path << "\n";
    out << "vtk_dir = " << cfg.vtk_dir << "\n";
    out << "snapshot_every = " << cfg.snapshot_every << "\n";
    out << "levels = ";
    for (std::size_t i = 0; i < cfg.levels.size(); ++i)
        out << (i ? "," : "") << cfg.levels[i];
    out << "\n";
    out << "epsilons = ";
    for (std::size_t i = 0; i < cfg.epsilons.size(); ++i)
        out << (i ? "," : "") << fmt(cfg.epsilons[i]);
    out << "\n";
    return out.str();
}

VectorFn initial_data_fn(const Config& cfg) {
    PresetExprs raw = preset_exprs(cfg.initial);
    std::string sx = raw.x, sy = raw.y, sz = raw.z;
    if (cfg.initial == InitialKind::expr) {
        sx = cfg.init_x;
        sy = cfg.init_y;
        sz = cfg.init_z;
    }
    auto ex = std::make_shared<Expression>(Expression::parse(sx));
    auto ey = std::make_shared<Expression>(Expression::parse(sy));
    auto ez = std::make_shared<Expression>(Expression::parse(sz));
    return [ex, ey, ez](double x, double y) -> Vec3 {
        return {ex->eval(x, y), ey->eval(x, y), ez->eval(x, y)};
    };
}

VectorGradFn initial_data_grad(const Config& cfg) {
    PresetExprs raw = preset_exprs(cfg.initial);
    std::string sx = raw.x, sy = raw.y, sz = raw.z;
    if (cfg.initial == InitialKind::expr) {
        sx = cfg.init_x;
        sy = cfg.init_y;
        sz = cfg.init_z;
    }
    auto make = [](const std::string& s, char var) {
        return std::make_shared<Expression>(Expression::parse(s).derivative(var));
    };
    auto dxx = make(sx, 'x'), dxy = make(sx, 'y');
    auto dyx = make(sy, 'x'), dyy = make(sy, 'y');
    auto dzx = make(sz, 'x'), dzy = make(sz, 'y');
    return [dxx, dxy, dyx, dyy, dzx, dzy](double x, double y) -> std::array<Vec3, 2> {
        return {Vec3{dxx->eval(x, y), dyx->eval(x, y), dzx->eval(x, y)},
                Vec3{dxy->eval(x, y), dyy->eval(x, y), dzy->eval(x, y)}};
    };
}

const char* scheme_name(SchemeKind s) {
    switch (s) {
    case SchemeKind::euler: return "euler";
    case SchemeKind::euler_bloch: return "euler_bloch";
    case SchemeKind::cn: return "cn";
    }
    return "?";
}

} // namespace llbar
