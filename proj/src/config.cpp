#include "projseg/config.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "projseg/io.hpp"

namespace projseg {

Task task_from_string(const std::string& s) {
    if (s == "rv") return Task::Rv;
    if (s == "faz") return Task::Faz;
    if (s == "multitask") return Task::Multitask;
    fail("unknown task '", s, "' (expected rv, faz or multitask)");
}

std::string to_string(Task t) {
    switch (t) {
        case Task::Rv: return "rv";
        case Task::Faz: return "faz";
        case Task::Multitask: return "multitask";
    }
    return "?";
}

bool RunConfig::use_distance_map() const {
    if (distance_map == "on") return true;
    if (distance_map == "off") return false;
    // auto: the distance map is the FAZ position prior
    return task != Task::Rv;
}

IpnConfig RunConfig::ipn_config() const {
    IpnConfig c;
    c.plm_channels = ipn_channels;
    c.plm_strides = ipn_strides;
    c.convs_per_plm = ipn_convs_per_plm;
    c.num_classes = num_classes();
    c.input_channels = input_channels();
    c.skip_channels = ipn_skip_channels;
    return c;
}

PlanePerceptronConfig RunConfig::perceptron_config() const {
    PlanePerceptronConfig c;
    c.unet_depth = pp_depth;
    c.base_channels = pp_base_channels;
    c.penultimate_channels = pp_penultimate_channels;
    return c;
}

GlobalNetConfig RunConfig::global_config() const {
    GlobalNetConfig c;
    c.unet_depth = global_depth;
    c.base_channels = global_base_channels;
    return c;
}

PhantomSpec RunConfig::phantom_spec() const {
    PhantomSpec s;
    s.L = gen_length;
    s.W = gen_width;
    s.H = gen_height;
    s.vessel_count = gen_vessel_count;
    s.vessel_radius_min = gen_vessel_radius_min;
    s.vessel_radius_max = gen_vessel_radius_max;
    s.vessel_intensity = gen_vessel_intensity;
    s.faz_radius = gen_faz_radius;
    s.ilm_base = gen_ilm_base;
    s.inner_thickness = gen_inner_thickness;
    s.outer_thickness = gen_outer_thickness;
    s.surface_wobble = gen_surface_wobble;
    s.noise_sigma = gen_noise_sigma;
    return s;
}

void RunConfig::validate() const {
    ipn_config().validate();
    perceptron_config().validate();
    global_config().validate();
    check(ipn_config().patch_height() == patch_height, "patch.height ", patch_height,
          " must equal the product of ipn.strides = ", ipn_config().patch_height());
    check(patch_step >= 1 && patch_step <= std::min(patch_length, patch_width), "patch.step ", patch_step,
          " must lie in [1, min(patch extents)]");
    if (variant != Variant::Ipn) {
        const int mult = 1 << pp_depth;
        check(patch_length % mult == 0 && patch_width % mult == 0, "patch plane ", patch_length, "x",
              patch_width, " must be divisible by 2^pp.depth = ", mult);
    }
    check(train_max_iters >= 1 && stage2_max_iters >= 1, "iteration counts must be >= 1");
    check(train_save_every >= 1 && stage2_save_every >= 1, "save frequencies must be >= 1");
    check(train_batch >= 1 && stage2_batch >= 1, "batch sizes must be >= 1");
    check(train_lr > 0 && stage2_lr > 0, "learning rates must be positive");
    check(eval_sweep_step > 0 && eval_sweep_step < 1, "eval.sweep_step must lie in (0,1)");
    check(distance_map == "auto" || distance_map == "on" || distance_map == "off",
          "distance_map must be auto, on or off, got '", distance_map, "'");
    if (infer_threshold != "auto") {
        const double t = std::stod(infer_threshold);
        check(t > 0.0 && t < 1.0, "infer.threshold must be auto or in (0,1), got ", infer_threshold);
    }
}

namespace {

std::string trim(const std::string& s) {
    const std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

int parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const int out = std::stoi(v, &used);
        check(used == v.size(), "");
        return out;
    } catch (...) {
        fail("config key '", key, "': '", v, "' is not an integer");
    }
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double out = std::stod(v, &used);
        check(used == v.size(), "");
        return out;
    } catch (...) {
        fail("config key '", key, "': '", v, "' is not a number");
    }
}

std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
    std::vector<int> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_int(key, trim(item)));
    check(!out.empty(), "config key '", key, "': empty list");
    return out;
}

std::string int_list_str(const std::vector<int>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(v[i]);
    }
    return out;
}

std::string double_str(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

void apply_config_entry(RunConfig& c, const std::string& key, const std::string& value) {
    if (key == "seed") c.seed = static_cast<std::uint64_t>(std::stoull(value));
    else if (key == "task") c.task = task_from_string(value);
    else if (key == "variant") c.variant = variant_from_string(value);
    else if (key == "data_dir") c.data_dir = value;
    else if (key == "gen.n") c.gen_n = parse_int(key, value);
    else if (key == "gen.length") c.gen_length = parse_int(key, value);
    else if (key == "gen.width") c.gen_width = parse_int(key, value);
    else if (key == "gen.height") c.gen_height = parse_int(key, value);
    else if (key == "gen.vessel_count") c.gen_vessel_count = parse_int(key, value);
    else if (key == "gen.vessel_radius_min") c.gen_vessel_radius_min = parse_double(key, value);
    else if (key == "gen.vessel_radius_max") c.gen_vessel_radius_max = parse_double(key, value);
    else if (key == "gen.vessel_intensity") c.gen_vessel_intensity = parse_double(key, value);
    else if (key == "gen.faz_radius") c.gen_faz_radius = parse_double(key, value);
    else if (key == "gen.ilm_base") c.gen_ilm_base = parse_int(key, value);
    else if (key == "gen.inner_thickness") c.gen_inner_thickness = parse_int(key, value);
    else if (key == "gen.outer_thickness") c.gen_outer_thickness = parse_int(key, value);
    else if (key == "gen.surface_wobble") c.gen_surface_wobble = parse_double(key, value);
    else if (key == "gen.noise_sigma") c.gen_noise_sigma = parse_double(key, value);
    else if (key == "gen.train_frac") c.gen_train_frac = parse_double(key, value);
    else if (key == "gen.val_frac") c.gen_val_frac = parse_double(key, value);
    else if (key == "gen.test_frac") c.gen_test_frac = parse_double(key, value);
    else if (key == "patch.length") c.patch_length = parse_int(key, value);
    else if (key == "patch.width") c.patch_width = parse_int(key, value);
    else if (key == "patch.height") c.patch_height = parse_int(key, value);
    else if (key == "patch.step") c.patch_step = parse_int(key, value);
    else if (key == "ipn.channels") c.ipn_channels = parse_int_list(key, value);
    else if (key == "ipn.strides") c.ipn_strides = parse_int_list(key, value);
    else if (key == "ipn.convs_per_plm") c.ipn_convs_per_plm = parse_int(key, value);
    else if (key == "ipn.skip_channels") c.ipn_skip_channels = parse_int(key, value);
    else if (key == "distance_map") c.distance_map = value;
    else if (key == "pp.depth") c.pp_depth = parse_int(key, value);
    else if (key == "pp.base_channels") c.pp_base_channels = parse_int(key, value);
    else if (key == "pp.penultimate_channels") c.pp_penultimate_channels = parse_int(key, value);
    else if (key == "global.depth") c.global_depth = parse_int(key, value);
    else if (key == "global.base_channels") c.global_base_channels = parse_int(key, value);
    else if (key == "train.max_iters") c.train_max_iters = parse_int(key, value);
    else if (key == "train.save_every") c.train_save_every = parse_int(key, value);
    else if (key == "train.lr") c.train_lr = parse_double(key, value);
    else if (key == "train.batch") c.train_batch = parse_int(key, value);
    else if (key == "stage2.max_iters") c.stage2_max_iters = parse_int(key, value);
    else if (key == "stage2.save_every") c.stage2_save_every = parse_int(key, value);
    else if (key == "stage2.lr") c.stage2_lr = parse_double(key, value);
    else if (key == "stage2.batch") c.stage2_batch = parse_int(key, value);
    else if (key == "infer.threshold") c.infer_threshold = value;
    else if (key == "eval.sweep_step") c.eval_sweep_step = parse_double(key, value);
    else fail("unknown config key '", key, "'");
}

RunConfig parse_config_text(const std::string& text) {
    RunConfig c;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        check(eq != std::string::npos, "config line ", lineno, " is not 'key = value': '", line, "'");
        apply_config_entry(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return c;
}

RunConfig parse_config_file(const std::filesystem::path& path) {
    check(std::filesystem::exists(path), "config file '", path.string(), "' does not exist");
    return parse_config_text(read_text_file(path));
}

std::string config_echo(const RunConfig& c) {
    std::ostringstream os;
    os << "seed = " << c.seed << "\n";
    os << "task = " << to_string(c.task) << "\n";
    os << "variant = " << to_string(c.variant) << "\n";
    os << "data_dir = " << c.data_dir << "\n";
    os << "gen.n = " << c.gen_n << "\n";
    os << "gen.length = " << c.gen_length << "\n";
    os << "gen.width = " << c.gen_width << "\n";
    os << "gen.height = " << c.gen_height << "\n";
    os << "gen.vessel_count = " << c.gen_vessel_count << "\n";
    os << "gen.vessel_radius_min = " << double_str(c.gen_vessel_radius_min) << "\n";
    os << "gen.vessel_radius_max = " << double_str(c.gen_vessel_radius_max) << "\n";
    os << "gen.vessel_intensity = " << double_str(c.gen_vessel_intensity) << "\n";
    os << "gen.faz_radius = " << double_str(c.gen_faz_radius) << "\n";
    os << "gen.ilm_base = " << c.gen_ilm_base << "\n";
    os << "gen.inner_thickness = " << c.gen_inner_thickness << "\n";
    os << "gen.outer_thickness = " << c.gen_outer_thickness << "\n";
    os << "gen.surface_wobble = " << double_str(c.gen_surface_wobble) << "\n";
    os << "gen.noise_sigma = " << double_str(c.gen_noise_sigma) << "\n";
    os << "gen.train_frac = " << double_str(c.gen_train_frac) << "\n";
    os << "gen.val_frac = " << double_str(c.gen_val_frac) << "\n";
    os << "gen.test_frac = " << double_str(c.gen_test_frac) << "\n";
    os << "patch.length = " << c.patch_length << "\n";
    os << "patch.width = " << c.patch_width << "\n";
    os << "patch.height = " << c.patch_height << "\n";
    os << "patch.step = " << c.patch_step << "\n";
    os << "ipn.channels = " << int_list_str(c.ipn_channels) << "\n";
    os << "ipn.strides = " << int_list_str(c.ipn_strides) << "\n";
    os << "ipn.convs_per_plm = " << c.ipn_convs_per_plm << "\n";
    os << "ipn.skip_channels = " << c.ipn_skip_channels << "\n";
    os << "distance_map = " << c.distance_map << "\n";
    os << "pp.depth = " << c.pp_depth << "\n";
    os << "pp.base_channels = " << c.pp_base_channels << "\n";
    os << "pp.penultimate_channels = " << c.pp_penultimate_channels << "\n";
    os << "global.depth = " << c.global_depth << "\n";
    os << "global.base_channels = " << c.global_base_channels << "\n";
    os << "train.max_iters = " << c.train_max_iters << "\n";
    os << "train.save_every = " << c.train_save_every << "\n";
    os << "train.lr = " << double_str(c.train_lr) << "\n";
    os << "train.batch = " << c.train_batch << "\n";
    os << "stage2.max_iters = " << c.stage2_max_iters << "\n";
    os << "stage2.save_every = " << c.stage2_save_every << "\n";
    os << "stage2.lr = " << double_str(c.stage2_lr) << "\n";
    os << "stage2.batch = " << c.stage2_batch << "\n";
    os << "infer.threshold = " << c.infer_threshold << "\n";
    os << "eval.sweep_step = " << double_str(c.eval_sweep_step) << "\n";
    return os.str();
}

}  // namespace projseg
