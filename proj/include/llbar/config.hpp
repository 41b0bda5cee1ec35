#pragma once

#include "llbar/model.hpp"
#include "llbar/schemes.hpp"

#include <string>
#include <vector>

namespace llbar {

enum class InitialKind { zero, sim1, sim2, expr };
enum class InitialProjection { ritz, nodal };

// Fully validated run configuration. Parsed from a flat key = value text
// (lists comma-separated); unknown keys are rejected.
struct Config {
    ModelParams physics;

    int dim = 2;
    int divisions = 32;
    double dt = 0.0;
    double t_end = 0.0;

    SchemeKind scheme = SchemeKind::euler;

    double newton_tol = 1e-10;
    int newton_max_iter = 25;
    double linear_tol = 1e-12;
    int linear_max_iter = 20000;
    int first_step_substeps = 1;
    bool cn_first_beta = true;

    InitialKind initial = InitialKind::zero;
    std::string init_x, init_y, init_z;  // when initial == expr
    InitialProjection initial_projection = InitialProjection::ritz;

    std::string csv_path;
    std::string vtk_dir;
    int snapshot_every = 0;  // 0 disables snapshots

    std::vector<int> levels;        // converge subcommand
    std::vector<double> epsilons;   // epsilon subcommand

    SchemeConfig scheme_config() const;

    bool operator==(const Config&) const = default;
};

// Parses configuration text. Validation failures throw config_error with a
// message naming the offending key. Presets sim1/sim2 expand to the standard
// parameter sets before the remaining keys are applied.
Config parse_config_text(const std::string& text);
Config parse_config_file(const std::string& path);

// Applies one key=value assignment on top of an existing config (used for
// command-line overrides). "preset" is accepted here too.
void apply_override(Config& cfg, const std::string& key_value);

// Canonical flat rendering; parse_config_text(serialize_config(c)) == c.
std::string serialize_config(const Config& cfg);

// The sampled initial data and its gradient for the configured choice.
VectorFn initial_data_fn(const Config& cfg);
VectorGradFn initial_data_grad(const Config& cfg);

const char* scheme_name(SchemeKind s);

} // namespace llbar
