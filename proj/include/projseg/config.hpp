#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "projseg/network.hpp"
#include "projseg/synthdata.hpp"

namespace projseg {

enum class Task { Rv, Faz, Multitask };

Task task_from_string(const std::string& s);
std::string to_string(Task t);

// Every tunable of every module, parseable from a line-oriented
// "key = value" file. Unknown keys are rejected. Defaults are the tested
// desk-scale configuration; configs/paper.cfg carries the full-scale values.
struct RunConfig {
    std::uint64_t seed = 1;
    Task task = Task::Rv;
    Variant variant = Variant::IpnV2;
    std::string data_dir = "dataset";

    // phantom generation
    int gen_n = 30;
    int gen_length = 64;
    int gen_width = 64;
    int gen_height = 32;
    int gen_vessel_count = 12;
    double gen_vessel_radius_min = 1.0;
    double gen_vessel_radius_max = 2.0;
    double gen_vessel_intensity = 0.9;
    double gen_faz_radius = 10.0;
    int gen_ilm_base = 6;
    int gen_inner_thickness = 10;
    int gen_outer_thickness = 9;
    double gen_surface_wobble = 2.0;
    double gen_noise_sigma = 0.05;
    double gen_train_frac = 0.6;
    double gen_val_frac = 0.2;
    double gen_test_frac = 0.2;

    // patch geometry
    int patch_length = 16;
    int patch_width = 16;
    int patch_height = 16;  // axial extent after resampling
    int patch_step = 8;

    // architecture
    std::vector<int> ipn_channels{8, 16};
    std::vector<int> ipn_strides{4, 4};
    int ipn_convs_per_plm = 2;
    int ipn_skip_channels = 8;
    std::string distance_map = "auto";  // auto | on | off
    int pp_depth = 2;
    int pp_base_channels = 8;
    int pp_penultimate_channels = 8;
    int global_depth = 2;
    int global_base_channels = 8;

    // training
    int train_max_iters = 2000;
    int train_save_every = 100;
    double train_lr = 1e-4;
    int train_batch = 1;
    int stage2_max_iters = 500;
    int stage2_save_every = 25;
    double stage2_lr = 1e-4;
    int stage2_batch = 2;

    // inference / evaluation
    std::string infer_threshold = "auto";  // auto | numeric literal
    double eval_sweep_step = 0.01;

    // ---- derived ----
    bool use_distance_map() const;
    int input_channels() const { return 2 + (use_distance_map() ? 1 : 0); }
    int num_classes() const { return task == Task::Multitask ? 3 : 2; }

    IpnConfig ipn_config() const;
    PlanePerceptronConfig perceptron_config() const;
    GlobalNetConfig global_config() const;
    PhantomSpec phantom_spec() const;

    void validate() const;
};

// Parse "key = value" lines; '#' starts a comment; unknown keys fail.
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::filesystem::path& path);

// apply one "key=value" assignment (shared by file parsing and overrides)
void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value);

// the complete effective configuration, echoing every key
std::string config_echo(const RunConfig& cfg);

}  // namespace projseg
