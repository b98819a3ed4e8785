#include "projseg/cli.hpp"

#include <CLI11.hpp>
#include <iostream>
#include <map>
#include <sstream>

#include "projseg/io.hpp"
#include "projseg/projection.hpp"
#include "projseg/train.hpp"

namespace projseg::cli {

namespace {

void refuse_dirty(bool dirty, const fs::path& what, bool force) {
    if (dirty && !force)
        fail("output '", what.string(), "' already exists; re-run with --force to overwrite");
}

void echo_config(const RunConfig& cfg, const Options& opt) {
    fs::create_directories(opt.out_dir);
    write_text_file(opt.out_dir / "config.txt", config_echo(cfg));
}

std::vector<std::string> split_ids(const RunConfig& cfg, const Options& opt, const std::string& split) {
    if (!opt.ids.empty()) return opt.ids;
    std::vector<std::string> out;
    for (const ManifestEntry& e : read_manifest(fs::path(cfg.data_dir) / "manifest.txt"))
        if (e.split == split) out.push_back(e.id);
    check(!out.empty(), "no '", split, "' samples in manifest");
    return out;
}

std::map<std::string, double> read_thresholds(const fs::path& path) {
    check(fs::exists(path), "no threshold file at '", path.string(),
          "' (run the train subcommand, or set infer.threshold)");
    std::map<std::string, double> out;
    std::istringstream in(read_text_file(path));
    std::string cls;
    double value = 0.0;
    while (in >> cls >> value) out[cls] = value;
    check(!out.empty(), "threshold file '", path.string(), "' is empty");
    return out;
}

std::map<std::string, double> resolve_thresholds(const RunConfig& cfg, const Options& opt) {
    std::map<std::string, double> out;
    if (cfg.infer_threshold == "auto")
        return read_thresholds(opt.out_dir / "reports" / "best_threshold.txt");
    for (const auto& [cls, name] : foreground_classes(cfg.task)) out[name] = std::stod(cfg.infer_threshold);
    return out;
}

// stage-1 network for the configured variant, weights from the run directory
PatchNet load_patch_net(const RunConfig& cfg, const Options& opt) {
    PatchNet net(cfg.ipn_config(), cfg.perceptron_config(), cfg.variant != Variant::Ipn);
    const fs::path ckpt = opt.out_dir / "checkpoints" / "stage1_best.ckpt";
    check(fs::exists(ckpt), "missing stage-1 checkpoint '", ckpt.string(), "'");
    load_checkpoint(ckpt, net.params());
    return net;
}

GlobalNet load_global_net(const RunConfig& cfg, const Options& opt) {
    GlobalNet net(cfg.global_config(), cfg.pp_penultimate_channels, cfg.num_classes());
    const fs::path ckpt = opt.out_dir / "checkpoints" / "stage2_best.ckpt";
    check(fs::exists(ckpt), "missing stage-2 checkpoint '", ckpt.string(), "'");
    load_checkpoint(ckpt, net.params());
    return net;
}

}  // namespace

std::vector<std::pair<int, std::string>> foreground_classes(Task task) {
    switch (task) {
        case Task::Rv: return {{1, "rv"}};
        case Task::Faz: return {{1, "faz"}};
        case Task::Multitask: return {{1, "rv"}, {2, "faz"}};
    }
    return {};
}

void cmd_gen(const RunConfig& cfg, const Options& opt) {
    refuse_dirty(fs::exists(opt.out_dir / "manifest.txt"), opt.out_dir / "manifest.txt", opt.force);
    echo_config(cfg, opt);
    SplitFractions fractions{cfg.gen_train_frac, cfg.gen_val_frac, cfg.gen_test_frac};
    const std::vector<ManifestEntry> manifest =
        gen_dataset(cfg.phantom_spec(), cfg.gen_n, fractions, cfg.seed, opt.out_dir);
    int train = 0, val = 0, test = 0;
    for (const ManifestEntry& e : manifest) {
        if (e.split == "train") ++train;
        else if (e.split == "val") ++val;
        else ++test;
    }
    std::cout << "generated " << manifest.size() << " samples (" << train << "/" << val << "/" << test
              << " train/val/test) in " << opt.out_dir.string() << "\n";
}

void cmd_train(const RunConfig& cfg, const Options& opt) {
    refuse_dirty(fs::exists(opt.out_dir / "logs" / "stage1.log"), opt.out_dir / "logs", opt.force);
    echo_config(cfg, opt);
    const TrainData data = load_train_data(cfg);
    fs::create_directories(opt.out_dir / "logs");
    fs::create_directories(opt.out_dir / "reports");

    PatchNet net(cfg.ipn_config(), cfg.perceptron_config(), cfg.variant != Variant::Ipn);
    const TrainResult stage1 =
        train_stage1(net, data, cfg, cfg.seed, opt.out_dir / "checkpoints");
    write_text_file(opt.out_dir / "logs" / "stage1.log", log_to_text(stage1.log));
    std::cout << "stage 1: best val dice " << stage1.best_val_dice << " at iteration " << stage1.best_iter
              << "\n";

    std::optional<GlobalNet> gnet;
    if (cfg.variant == Variant::IpnV2Plus) {
        gnet.emplace(cfg.global_config(), cfg.pp_penultimate_channels, cfg.num_classes());
        const TrainResult stage2 =
            train_stage2(net, *gnet, data, cfg, cfg.seed, opt.out_dir / "checkpoints");
        write_text_file(opt.out_dir / "logs" / "stage2.log", log_to_text(stage2.log));
        std::cout << "stage 2: best val dice " << stage2.best_val_dice << " at iteration "
                  << stage2.best_iter << "\n";
    }

    // best threshold per foreground class over the validation split
    std::string threshold_lines;
    for (const auto& [cls, name] : foreground_classes(cfg.task)) {
        std::vector<Map2D> probs, gts;
        for (const PreparedSample& s : data.val) {
            const Tensor prob = gnet ? infer_prob_map_global(net, *gnet, s, cfg, cfg.patch_step)
                                     : infer_prob_map(net, s, cfg, cfg.patch_step);
            probs.push_back(prob_channel(prob, cls));
            gts.push_back(gt_for_class(s, cfg.task, cls));
        }
        std::vector<double> sweep;
        for (double t = cfg.eval_sweep_step; t < 1.0 - 1e-12; t += cfg.eval_sweep_step) sweep.push_back(t);
        const double best = best_threshold(probs, gts, sweep);
        char line[64];
        std::snprintf(line, sizeof(line), "%s\t%.17g\n", name.c_str(), best);
        threshold_lines += line;
    }
    write_text_file(opt.out_dir / "reports" / "best_threshold.txt", threshold_lines);
}

void cmd_infer(const RunConfig& cfg, const Options& opt) {
    refuse_dirty(fs::exists(opt.out_dir / "maps"), opt.out_dir / "maps", opt.force);
    echo_config(cfg, opt);
    const PatchNet net = load_patch_net(cfg, opt);
    std::optional<GlobalNet> gnet;
    if (cfg.variant == Variant::IpnV2Plus) gnet.emplace(load_global_net(cfg, opt));

    const std::map<std::string, double> thresholds = resolve_thresholds(cfg, opt);
    const std::vector<std::string> ids = split_ids(cfg, opt, "test");
    fs::create_directories(opt.out_dir / "maps");
    fs::create_directories(opt.out_dir / "reports");

    std::string seam_lines;
    for (const std::string& id : ids) {
        const PreparedSample s = prepare_sample(load_sample(cfg.data_dir, id), cfg);
        const Tensor prob = gnet ? infer_prob_map_global(net, *gnet, s, cfg, cfg.patch_step)
                                 : infer_prob_map(net, s, cfg, cfg.patch_step);
        check(prob.dim(0) == s.L && prob.dim(1) == s.W, "probability map extent mismatch for '", id, "'");
        const PatchGrid grid = plan_patches(s.L, s.W, cfg.patch_length, cfg.patch_width, cfg.patch_step);
        for (const auto& [cls, name] : foreground_classes(cfg.task)) {
            const Map2D p = prob_channel(prob, cls);
            const fs::path stem = opt.out_dir / "maps" / (id + "_" + name);
            write_vmap(fs::path(stem.string() + "_prob.vmap"), p);
            write_scaled_pgm(fs::path(stem.string() + "_prob.pgm"), p);
            write_mask_pgm(fs::path(stem.string() + "_mask.pgm"), binarize(p, thresholds.at(name)));

            const double seam = seam_score(Tensor({s.L, s.W}, p.v), grid);
            char line[128];
            std::snprintf(line, sizeof(line), "%s\t%s\t%d\t%.17g\n", id.c_str(), name.c_str(), cfg.patch_step,
                          seam);
            seam_lines += line;
        }
    }
    write_text_file(opt.out_dir / "reports" / "seam.txt", seam_lines);
    std::cout << "inferred " << ids.size() << " samples into " << (opt.out_dir / "maps").string() << "\n";
}

void cmd_eval(const RunConfig& cfg, const Options& opt) {
    const std::map<std::string, double> thresholds = resolve_thresholds(cfg, opt);
    const std::vector<std::string> ids = split_ids(cfg, opt, "test");
    fs::create_directories(opt.out_dir / "reports");

    for (const auto& [cls, name] : foreground_classes(cfg.task)) {
        const fs::path csv_path = opt.out_dir / "reports" / ("eval_" + name + ".csv");
        refuse_dirty(fs::exists(csv_path), csv_path, opt.force);
        std::vector<Map2D> probs, gts;
        for (const std::string& id : ids) {
            const fs::path vmap = opt.out_dir / "maps" / (id + "_" + name + "_prob.vmap");
            check(fs::exists(vmap), "missing inference output '", vmap.string(),
                  "' (run the infer subcommand first)");
            probs.push_back(read_vmap(vmap));
            const Sample sample = load_sample(cfg.data_dir, id);
            gts.push_back(name == "rv" ? sample.rv_gt : sample.faz_gt);
        }
        const MetricReport report = evaluate_split(ids, probs, gts, thresholds.at(name));
        write_text_file(opt.out_dir / "reports" / ("eval_" + name + ".txt"), report.to_text());
        write_text_file(csv_path, report.to_csv());
        std::cout << name << ": dice " << report.dice_mean << " +/- " << report.dice_sd << ", jac "
                  << report.jac_mean << " +/- " << report.jac_sd << ", bacc " << report.bacc_mean << " +/- "
                  << report.bacc_sd << "\n";
    }
}

void cmd_project(const RunConfig& cfg, const Options& opt) {
    std::string id = opt.sample_id;
    if (id.empty()) {
        const auto manifest = read_manifest(fs::path(cfg.data_dir) / "manifest.txt");
        check(!manifest.empty(), "manifest is empty");
        id = manifest.front().id;
    }
    const fs::path dir = opt.out_dir / "projections";
    refuse_dirty(fs::exists(dir / (id + "_B1.pgm")), dir / (id + "_B1.pgm"), opt.force);
    echo_config(cfg, opt);
    fs::create_directories(dir);

    const Sample s = load_sample(cfg.data_dir, id);
    const std::array<Map2D, 6> maps = generate_all(s.oct, s.octa, s.surfaces);
    for (const Map2D& m : maps) {
        const std::string stem = id + "_" + to_string(m.kind);
        write_scaled_pgm(dir / (stem + ".pgm"), m);
        write_vmap(dir / (stem + ".vmap"), m);
    }
    std::cout << "wrote 6 projection maps for sample " << id << " into " << dir.string() << "\n";
}

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"3D-to-2D projection segmentation pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    Options opt;
    std::uint64_t seed_override = 0;
    bool seed_given = false;
    app.add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
    app.add_option("--out", opt.out_dir, "run directory for all outputs");
    app.add_option("--seed", seed_override, "overrides the config seed")->each([&](const std::string&) {
        seed_given = true;
    });
    app.add_flag("--force", opt.force, "overwrite outputs of a previous run");

    CLI::App* gen = app.add_subcommand("gen", "generate a synthetic phantom dataset");
    CLI::App* train = app.add_subcommand("train", "train the configured variant");
    CLI::App* infer = app.add_subcommand("infer", "write probability maps and masks");
    CLI::App* eval = app.add_subcommand("eval", "score inference outputs against ground truth");
    CLI::App* project = app.add_subcommand("project", "emit the six en-face projection maps");
    CLI::App* verify = app.add_subcommand("verify", "run gradient, oracle and invariant self-checks");
    for (CLI::App* sub : {gen, train, infer, eval, project, verify}) sub->fallthrough();

    std::string ids_csv;
    infer->add_option("--ids", ids_csv, "comma-separated sample ids (default: test split)");
    eval->add_option("--ids", ids_csv, "comma-separated sample ids (default: test split)");
    project->add_option("--sample", opt.sample_id, "sample id (default: first manifest entry)");
    verify->add_option("--corrupt", opt.corrupt_op, "test hook: corrupt one backward pass")
        ->group("");  // hidden

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        RunConfig cfg;
        if (!config_path.empty()) cfg = parse_config_file(config_path);
        if (seed_given) cfg.seed = seed_override;
        cfg.validate();
        if (!ids_csv.empty()) {
            std::stringstream ss(ids_csv);
            std::string id;
            while (std::getline(ss, id, ',')) opt.ids.push_back(id);
        }

        if (gen->parsed()) cmd_gen(cfg, opt);
        else if (train->parsed()) cmd_train(cfg, opt);
        else if (infer->parsed()) cmd_infer(cfg, opt);
        else if (eval->parsed()) cmd_eval(cfg, opt);
        else if (project->parsed()) cmd_project(cfg, opt);
        else if (verify->parsed()) {
            const int failures = cmd_verify(opt);
            return failures == 0 ? kExitOk : kExitVerify;
        }
        return kExitOk;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
}

}  // namespace projseg::cli
