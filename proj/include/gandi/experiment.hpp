#pragma once

// Experiment harness: data collection, training with checkpoint selection,
// evaluation with Wilson intervals, bound verification, and the toy-mixture
// pipeline. Every command is a pure function of (config, seed) and writes
// byte-identical files on reruns.

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gandi/adversarial.hpp"
#include "gandi/analysis.hpp"
#include "gandi/data.hpp"
#include "gandi/domains/binpack.hpp"
#include "gandi/domains/gmm.hpp"
#include "gandi/domains/reconfig.hpp"
#include "gandi/importance.hpp"
#include "gandi/planner.hpp"
#include "gandi/resampler.hpp"
#include "gandi/rng.hpp"

namespace gandi {

constexpr const char* kToolVersion = "gandi 1.0";

// ---------------------------------------------------------------------------
// Configuration

struct ExperimentConfig {
    std::string domain = "binpack";
    std::string method = "gandi";
    std::string out_dir = ".";
    std::uint64_t seed = 1;

    // planner
    std::size_t k = 3;
    std::size_t collect_budget = 0; // 0 = per-domain default
    std::size_t eval_budget = 0;
    double path_cost_weight = -1.0; // <0 = per-domain default

    // data
    std::size_t episodes = 0; // solved episodes to collect / train on
    std::size_t eval_trials = 100;
    std::size_t validation_instances = 10;
    std::vector<long> episode_counts; // eval sweep; default {episodes}
    std::vector<std::string> samplers = {"uniform", "gan", "gandi"};

    // training
    std::size_t batch_size = 32;
    std::size_t max_epochs = 500;
    std::size_t checkpoint_every = 25;
    std::size_t importance_epochs = 0; // 0 = per-domain default
    // Bootstrap at least this many points so small collections still give the
    // adversarial loop enough optimizer steps to avoid generator collapse.
    std::size_t bootstrap_min = 2560;

    // verification
    std::size_t verify_instances = 1000;
    std::size_t lemma_instances = 100;

    // toy pipeline
    std::size_t toy_on = 200;
    std::size_t toy_off = 2000;
    std::size_t toy_generated = 10000;
    std::size_t toy_epochs = 500;
    std::size_t toy_grid = 60;

    std::uint64_t config_hash = 0;

    void apply_domain_defaults() {
        if (domain == "binpack") {
            if (episodes == 0) episodes = 20;
            // a tight collection budget keeps the solved episodes plan-heavy
            if (collect_budget == 0) collect_budget = 20;
            // calibrated: uniform sampling solves ~50% of 7-object instances
            if (eval_budget == 0) eval_budget = 35;
            if (path_cost_weight < 0.0) path_cost_weight = 0.0;
            // short ratio fits generalize; long ones spike on single records
            if (importance_epochs == 0) importance_epochs = 120;
        } else if (domain == "reconfig") {
            if (episodes == 0) episodes = 35;
            if (collect_budget == 0) collect_budget = 400;
            if (eval_budget == 0) eval_budget = 60;
            if (path_cost_weight < 0.0) path_cost_weight = 1.0;
            if (importance_epochs == 0) importance_epochs = 120;
        } else { // gmm / toy
            if (episodes == 0) episodes = 1;
            if (collect_budget == 0) collect_budget = 1;
            if (eval_budget == 0) eval_budget = 1;
            if (path_cost_weight < 0.0) path_cost_weight = 0.0;
            if (importance_epochs == 0) importance_epochs = 500;
        }
        if (episode_counts.empty()) episode_counts = {static_cast<long>(episodes)};
    }

    /// Canonical serialization; hashing it makes the config hash independent
    /// of comment/whitespace differences in the source file.
    std::string canonical() const {
        std::ostringstream ss;
        ss << "domain=" << domain << "\nmethod=" << method << "\nseed=" << seed
           << "\nk=" << k << "\ncollect_budget=" << collect_budget
           << "\neval_budget=" << eval_budget
           << "\npath_cost_weight=" << csv_double(path_cost_weight)
           << "\nepisodes=" << episodes << "\neval_trials=" << eval_trials
           << "\nvalidation_instances=" << validation_instances << "\nepisode_counts=";
        for (std::size_t i = 0; i < episode_counts.size(); ++i)
            ss << (i ? "," : "") << episode_counts[i];
        ss << "\nsamplers=";
        for (std::size_t i = 0; i < samplers.size(); ++i) ss << (i ? "," : "") << samplers[i];
        ss << "\nbatch_size=" << batch_size << "\nmax_epochs=" << max_epochs
           << "\ncheckpoint_every=" << checkpoint_every
           << "\nimportance_epochs=" << importance_epochs
           << "\nbootstrap_min=" << bootstrap_min
           << "\nverify_instances=" << verify_instances
           << "\nlemma_instances=" << lemma_instances << "\ntoy_on=" << toy_on
           << "\ntoy_off=" << toy_off << "\ntoy_generated=" << toy_generated
           << "\ntoy_epochs=" << toy_epochs << "\ntoy_grid=" << toy_grid << "\n";
        return ss.str();
    }

    void finalize() {
        apply_domain_defaults();
        config_hash = fnv1a(canonical());
    }
};

inline ExperimentConfig make_experiment_config(const std::string& config_path,
                                               const std::string& domain,
                                               const std::string& method,
                                               const std::string& out_dir,
                                               std::uint64_t seed) {
    KeyValueConfig kv;
    if (!config_path.empty()) kv = KeyValueConfig::load(config_path);
    ExperimentConfig cfg;
    cfg.domain = domain.empty() ? kv.get("domain", cfg.domain) : domain;
    cfg.method = method.empty() ? kv.get("method", cfg.method) : method;
    cfg.out_dir = out_dir.empty() ? kv.get("out_dir", cfg.out_dir) : out_dir;
    cfg.seed = seed;
    auto sz = [&](const char* key, std::size_t fallback) {
        return static_cast<std::size_t>(kv.get_int(key, static_cast<long>(fallback)));
    };
    cfg.k = sz("k", cfg.k);
    cfg.collect_budget = sz("collect_budget", cfg.collect_budget);
    cfg.eval_budget = sz("eval_budget", cfg.eval_budget);
    cfg.path_cost_weight = kv.get_double("path_cost_weight", cfg.path_cost_weight);
    cfg.episodes = sz("episodes", cfg.episodes);
    cfg.eval_trials = sz("eval_trials", cfg.eval_trials);
    cfg.validation_instances = sz("validation_instances", cfg.validation_instances);
    cfg.episode_counts = kv.get_int_list("episode_counts", cfg.episode_counts);
    cfg.samplers = kv.get_list("samplers", cfg.samplers);
    cfg.batch_size = sz("batch_size", cfg.batch_size);
    cfg.max_epochs = sz("max_epochs", cfg.max_epochs);
    cfg.checkpoint_every = sz("checkpoint_every", cfg.checkpoint_every);
    cfg.importance_epochs = sz("importance_epochs", cfg.importance_epochs);
    cfg.bootstrap_min = sz("bootstrap_min", cfg.bootstrap_min);
    cfg.verify_instances = sz("verify_instances", cfg.verify_instances);
    cfg.lemma_instances = sz("lemma_instances", cfg.lemma_instances);
    cfg.toy_on = sz("toy_on", cfg.toy_on);
    cfg.toy_off = sz("toy_off", cfg.toy_off);
    cfg.toy_generated = sz("toy_generated", cfg.toy_generated);
    cfg.toy_epochs = sz("toy_epochs", cfg.toy_epochs);
    cfg.toy_grid = sz("toy_grid", cfg.toy_grid);
    cfg.finalize();
    return cfg;
}

// ---------------------------------------------------------------------------
// Output files and manifests

inline std::string hash_hex(std::uint64_t h) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

struct RunManifest {
    std::uint64_t config_hash = 0;
    std::vector<std::pair<std::string, std::uint64_t>> files; // (name, digest)

    std::string render() const {
        std::ostringstream ss;
        ss << "tool " << kToolVersion << "\n";
        ss << "config_hash " << hash_hex(config_hash) << "\n";
        for (const auto& [name, digest] : files)
            ss << "file " << name << " " << hash_hex(digest) << "\n";
        return ss.str();
    }
};

/// Writes `content` under out_dir and records its digest in the manifest.
inline void emit_file(const ExperimentConfig& cfg, RunManifest& manifest,
                      const std::string& name, const std::string& content) {
    std::filesystem::create_directories(cfg.out_dir);
    const auto path = std::filesystem::path(cfg.out_dir) / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path.string());
    out << content;
    manifest.files.emplace_back(name, fnv1a(content));
}

inline void emit_manifest(const ExperimentConfig& cfg, const RunManifest& manifest,
                          const std::string& name) {
    std::filesystem::create_directories(cfg.out_dir);
    const auto path = std::filesystem::path(cfg.out_dir) / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path.string());
    out << manifest.render();
}

/// Standard CSV prologue: header row then a comment with the config hash.
inline std::string csv_prologue(const ExperimentConfig& cfg, const std::string& header) {
    return header + "\n# config_hash=" + hash_hex(cfg.config_hash) + "\n";
}

// ---------------------------------------------------------------------------
// Generator model files

inline void save_generator(const Generator& g, std::ostream& out) {
    auto write_box = [&](const BoxBounds& box) {
        out << box.dim();
        for (double v : box.lo) out << " " << csv_double(v);
        for (double v : box.hi) out << " " << csv_double(v);
        out << "\n";
    };
    out << "GANDI-GEN v1\n" << g.noise_dim << " " << g.context_dim << "\n";
    write_box(g.context_box);
    write_box(g.action_box);
    save_model(g.net, out);
}

inline Generator load_generator(std::istream& in) {
    std::string magic;
    std::getline(in, magic);
    if (magic != "GANDI-GEN v1")
        throw std::runtime_error("generator file: unsupported version tag '" + magic + "'");
    Generator g;
    in >> g.noise_dim >> g.context_dim;
    auto read_box = [&](BoxBounds& box) {
        std::size_t dim = 0;
        if (!(in >> dim)) throw std::runtime_error("generator file: truncated box");
        box.lo.resize(dim);
        box.hi.resize(dim);
        for (auto& v : box.lo)
            if (!(in >> v)) throw std::runtime_error("generator file: truncated box");
        for (auto& v : box.hi)
            if (!(in >> v)) throw std::runtime_error("generator file: truncated box");
    };
    read_box(g.context_box);
    read_box(g.action_box);
    in >> std::ws;
    g.net = load_model(in);
    return g;
}

inline std::string generator_to_string(const Generator& g) {
    std::ostringstream ss;
    save_generator(g, ss);
    return ss.str();
}

inline Generator load_generator_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    return load_generator(in);
}

// ---------------------------------------------------------------------------
// Domain adapters: everything the harness needs that differs between the two
// planning domains.

template <class D>
struct EpisodeSetup {
    D domain;
    typename D::State initial;
    std::vector<double> params; // instance parameters for the episode log
};

struct BinpackAdapter {
    using Domain = BinPackDomain;
    using State = BinPackState;
    static constexpr const char* tag = "binpack";

    static EpisodeSetup<Domain> make(Rng& rng) {
        const auto inst = sample_binpack_instance(rng);
        return {BinPackDomain(inst), BinPackState{},
                {static_cast<double>(inst.n_obj), inst.object_size}};
    }
    static std::string instance_param_header() { return "n_obj,object_size"; }
    static std::string context_header() { return "n_obj,object_size"; }
    static std::string action_header() { return "action_x,action_y"; }
    static std::size_t context_dim() { return 2; }
    static std::size_t action_dim() { return 2; }
    static BoxBounds context_box() { return Domain::context_box(); }

    // The model works in per-instance normalized coordinates: u_x spans the
    // placeable depth range and u_y the distance from the nearer side wall
    // (the bin is symmetric in y, so placements are folded onto one half and
    // a side is drawn at sampling time). This puts every object size on the
    // same [0,1]^2 scale, so one conditional model serves all instances, and
    // u_y = 0 is exactly "flush against a wall" for every size.
    static BoxBounds action_box() { return {{0.0, 0.0}, {1.0, 1.0}}; }

    static std::vector<double> train_action(const std::vector<double>& a,
                                            const std::vector<double>& ctx) {
        const double h = ctx[1] / 2.0;
        const double off = std::min(a[1], kBinWidth - a[1]);
        return {std::clamp((a[0] - h) / (kBinDepth - 2.0 * h), 0.0, 1.0),
                std::clamp((off - h) / (kBinWidth / 2.0 - h), 0.0, 1.0)};
    }

    // Importance weights are fitted on the wall-distance coordinate alone: it
    // carries the on/off contrast (plans hug the walls, failures do not),
    // and the one-dimensional fit keeps the weights smooth across records.
    static BoxBounds importance_box() { return {{0.0}, {1.0}}; }
    static std::function<std::vector<double>(const std::vector<double>&)>
    importance_projection() {
        return [](const std::vector<double>& a) { return std::vector<double>{a[1]}; };
    }

    static ActionSampler<Domain> uniform_sampler(const Domain& domain) {
        return [domain](const State& s, Rng& rng) {
            return domain.sample_uniform_action(s, rng);
        };
    }
    static ActionSampler<Domain> model_sampler(const Domain& domain, const Generator& g) {
        const double h = domain.instance().object_size / 2.0;
        return [domain, g, h](const State& s, Rng& rng) {
            const auto a = sample_action(g, domain.featurize(s), rng);
            const double x = h + std::clamp(a[0], 0.0, 1.0) * (kBinDepth - 2.0 * h);
            const double off = h + std::clamp(a[1], 0.0, 1.0) * (kBinWidth / 2.0 - h);
            const double y = rng.uniform() < 0.5 ? off : kBinWidth - off;
            return std::vector<double>{x, y};
        };
    }
};

struct ReconfigAdapter {
    using Domain = ReconfigDomain;
    using State = ReconfigState;
    static constexpr const char* tag = "reconfig";

    static EpisodeSetup<Domain> make(Rng& rng) {
        const auto inst = sample_reconfig_instance(rng);
        std::vector<double> params;
        for (const auto& p : inst.initial.poses) {
            params.push_back(p[0]);
            params.push_back(p[1]);
        }
        return {ReconfigDomain{}, inst.initial, params};
    }
    static std::string pose_header() {
        std::string h;
        for (int i = 0; i < 5; ++i)
            h += "o" + std::to_string(i) + "_x,o" + std::to_string(i) + "_y,";
        return h + "target_x,target_y";
    }
    static std::string instance_param_header() { return pose_header(); }
    static std::string context_header() { return pose_header(); }
    static std::string action_header() { return "action_obj,action_x,action_y"; }
    static std::size_t context_dim() { return 12; }
    static std::size_t action_dim() { return 3; }
    static BoxBounds context_box() { return Domain::context_box(); }

    // The model emits (x, d) where d is the placement's lateral distance from
    // the target's access lane centre (context entry 11); the side and the
    // object index are drawn at sampling time. The box floor on d equals the
    // lane half-width (target half-size plus gripper clearance), so decoded
    // placements sit at or beyond the lane edge: the representation itself
    // expresses "do not park in front of the target", which is what every
    // solved episode's plan does.
    static constexpr double kLaneHalfWidth = kTargetSize / 2.0 + kCorridorClearance;
    static BoxBounds action_box() {
        const auto box = Domain::placement_box();
        return {{box.lo[0], kLaneHalfWidth}, {box.hi[0], box.hi[1] - box.lo[1]}};
    }
    static std::vector<double> train_action(const std::vector<double>& a,
                                            const std::vector<double>& ctx) {
        const auto box = action_box();
        return {a[1], std::clamp(std::abs(a[2] - ctx[11]), box.lo[1], box.hi[1])};
    }

    static BoxBounds importance_box() { return action_box(); }
    static std::function<std::vector<double>(const std::vector<double>&)>
    importance_projection() {
        return {};
    }

    static ActionSampler<Domain> uniform_sampler(const Domain& domain) {
        return [domain](const State& s, Rng& rng) {
            return domain.sample_uniform_action(s, rng);
        };
    }
    static ActionSampler<Domain> model_sampler(const Domain& domain, const Generator& g) {
        return [domain, g](const State& s, Rng& rng) {
            const std::size_t idx = rng.uniform_index(kNumObstacles);
            const auto a = sample_action(g, domain.featurize(s), rng);
            const auto xy = decode_pose(a, domain.featurize(s)[11], rng);
            return std::vector<double>{static_cast<double>(idx), xy[0], xy[1]};
        };
    }

    /// Maps a model output (x, d) to a pose: random side of the target lane,
    /// falling back to the other side (then the nearer lane edge) when the
    /// chosen one leaves the placement box.
    static std::array<double, 2> decode_pose(const std::vector<double>& a, double target_y,
                                             Rng& rng) {
        const auto box = Domain::placement_box();
        const double x = std::clamp(a[0], box.lo[0], box.hi[0]);
        const double d = std::max(a[1], kLaneHalfWidth);
        const double side = rng.uniform() < 0.5 ? 1.0 : -1.0;
        double y = target_y + side * d;
        if (y < box.lo[1] || y > box.hi[1]) {
            const double alt = target_y - side * d;
            if (alt >= box.lo[1] && alt <= box.hi[1]) {
                y = alt;
            } else {
                y = std::clamp(y, box.lo[1], box.hi[1]);
                if (std::abs(y - target_y) < kLaneHalfWidth)
                    y = target_y + kLaneHalfWidth <= box.hi[1] ? target_y + kLaneHalfWidth
                                                               : target_y - kLaneHalfWidth;
            }
        }
        return {x, y};
    }
};

// ---------------------------------------------------------------------------
// Dataset files

/// Parses a sample CSV written by cmd_collect: episode_id, context columns,
/// action columns, label. Comment lines are ignored.
inline std::vector<LabeledSample> read_dataset(const std::string& path,
                                               std::size_t context_dim, std::size_t action_dim,
                                               std::size_t max_episode,
                                               std::vector<long>* episode_ids = nullptr) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);
    std::vector<LabeledSample> out;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        const auto cols = split_csv_line(line);
        if (cols.size() != 2 + context_dim + action_dim)
            throw std::runtime_error("dataset file: bad column count in " + path);
        const long episode = std::stol(cols[0]);
        if (static_cast<std::size_t>(episode) >= max_episode) continue;
        LabeledSample s;
        for (std::size_t i = 0; i < context_dim; ++i)
            s.context.push_back(std::stod(cols[1 + i]));
        for (std::size_t i = 0; i < action_dim; ++i)
            s.action.push_back(std::stod(cols[1 + context_dim + i]));
        const std::string& label = cols.back();
        if (label == "on_target")
            s.label = SampleLabel::on_target;
        else if (label == "off_target")
            s.label = SampleLabel::off_target;
        else
            throw std::runtime_error("dataset file: unknown label '" + label + "'");
        if (episode_ids) episode_ids->push_back(episode);
        out.push_back(std::move(s));
    }
    if (!header_seen) throw std::runtime_error("dataset file: missing header in " + path);
    return out;
}

inline std::string dataset_file_name(const std::string& domain, SampleLabel label) {
    return domain + (label == SampleLabel::on_target ? "_on.csv" : "_off.csv");
}

inline std::string model_file_name(const std::string& method, const std::string& domain,
                                   std::size_t episodes) {
    return "model_" + method + "_" + domain + "_ep" + std::to_string(episodes) + ".txt";
}

// ---------------------------------------------------------------------------
// cmd_collect

template <class Adapter>
void collect_impl(const ExperimentConfig& cfg) {
    std::ostringstream on_csv, off_csv, episodes_csv;
    const std::string sample_header =
        "episode_id," + Adapter::context_header() + "," + Adapter::action_header() + ",label";
    on_csv << csv_prologue(cfg, sample_header);
    off_csv << csv_prologue(cfg, sample_header);
    episodes_csv << csv_prologue(cfg, "episode_id," + Adapter::instance_param_header() +
                                          ",plan_length,expansions");

    auto write_samples = [](std::ostringstream& out, std::size_t episode,
                            const std::vector<LabeledSample>& samples) {
        for (const auto& s : samples) {
            out << episode;
            for (double v : s.context) out << "," << csv_double(v);
            for (double v : s.action) out << "," << csv_double(v);
            out << "," << to_string(s.label) << "\n";
        }
    };

    std::size_t solved = 0;
    const std::size_t max_attempts = cfg.episodes * 50;
    for (std::size_t attempt = 0; attempt < max_attempts && solved < cfg.episodes; ++attempt) {
        Rng inst_rng(Rng::derive(cfg.seed, "collect-inst", attempt));
        Rng search_rng(Rng::derive(cfg.seed, "collect-search", attempt));
        auto setup = Adapter::make(inst_rng);
        auto sampler = Adapter::uniform_sampler(setup.domain);
        auto result = search(setup.domain, setup.initial, cfg.k, sampler,
                             {cfg.collect_budget}, search_rng, cfg.path_cost_weight);
        if (result.outcome != SearchOutcome::solved || result.plan.empty()) continue;
        auto [on, off] = extract_experience(result, [&setup](const typename Adapter::State& s) {
            return setup.domain.featurize(s);
        });
        write_samples(on_csv, solved, on);
        write_samples(off_csv, solved, off);
        episodes_csv << solved;
        for (double v : setup.params) episodes_csv << "," << csv_double(v);
        episodes_csv << "," << result.plan.size() << "," << result.expansions << "\n";
        ++solved;
    }
    if (solved == 0)
        throw std::runtime_error("collect: no instance solved with a non-trivial plan; "
                                 "increase collect_budget");
    if (solved < cfg.episodes)
        throw std::runtime_error("collect: only " + std::to_string(solved) + " of " +
                                 std::to_string(cfg.episodes) +
                                 " episodes solved; increase collect_budget");

    RunManifest manifest{cfg.config_hash, {}};
    emit_file(cfg, manifest, dataset_file_name(Adapter::tag, SampleLabel::on_target),
              on_csv.str());
    emit_file(cfg, manifest, dataset_file_name(Adapter::tag, SampleLabel::off_target),
              off_csv.str());
    emit_file(cfg, manifest, std::string(Adapter::tag) + "_episodes.csv", episodes_csv.str());
    emit_manifest(cfg, manifest, std::string("manifest_collect_") + Adapter::tag + ".txt");
}

inline void cmd_collect(const ExperimentConfig& cfg) {
    if (cfg.domain == "binpack")
        collect_impl<BinpackAdapter>(cfg);
    else if (cfg.domain == "reconfig")
        collect_impl<ReconfigAdapter>(cfg);
    else
        throw std::invalid_argument("collect: unsupported domain '" + cfg.domain + "'");
}

// ---------------------------------------------------------------------------
// cmd_train

template <class Adapter>
std::size_t validation_successes(const ExperimentConfig& cfg, const Generator& g,
                                 std::size_t instance_index) {
    Rng inst_rng(Rng::derive(cfg.seed, "validate-inst", instance_index));
    Rng search_rng(Rng::derive(cfg.seed, "validate-run", instance_index));
    auto setup = Adapter::make(inst_rng);
    auto sampler = Adapter::model_sampler(setup.domain, g);
    auto result = search(setup.domain, setup.initial, cfg.k, sampler, {cfg.eval_budget},
                         search_rng, cfg.path_cost_weight);
    return result.outcome == SearchOutcome::solved ? 1 : 0;
}

template <class Adapter>
void train_impl(const ExperimentConfig& cfg) {
    const auto dir = std::filesystem::path(cfg.out_dir);
    auto on = read_dataset((dir / dataset_file_name(Adapter::tag, SampleLabel::on_target))
                               .string(),
                           Adapter::context_dim(), Adapter::action_dim(), cfg.episodes);
    auto off = read_dataset((dir / dataset_file_name(Adapter::tag, SampleLabel::off_target))
                                .string(),
                            Adapter::context_dim(), Adapter::action_dim(), cfg.episodes);
    for (auto* set : {&on, &off})
        for (auto& s : *set) s.action = Adapter::train_action(s.action, s.context);
    if (cfg.method == "gandi" && on.empty())
        throw std::runtime_error("train: no on-target samples available");

    TrainConfig train_cfg;
    train_cfg.batch_size = cfg.batch_size;
    train_cfg.max_epochs = cfg.max_epochs;
    train_cfg.checkpoint_every = cfg.checkpoint_every;

    Rng rng(Rng::derive(cfg.seed, "train-" + cfg.method, 0));
    TrainResult trained;
    if (cfg.method == "gan") {
        trained = train_gan(on, Adapter::context_box(), Adapter::action_box(), train_cfg, rng);
    } else if (cfg.method == "gandi") {
        GandiConfig gcfg;
        gcfg.train = train_cfg;
        gcfg.importance.batch_size = cfg.batch_size;
        gcfg.importance.max_epochs = cfg.importance_epochs;
        gcfg.importance.context_box = Adapter::context_box();
        gcfg.importance.action_box = Adapter::importance_box();
        gcfg.importance_projection = Adapter::importance_projection();
        gcfg.gan_action_box = Adapter::action_box();
        gcfg.bootstrap_min = cfg.bootstrap_min;
        trained = gandi(on, off, gcfg, rng).gan;
    } else {
        throw std::invalid_argument("train: unknown method '" + cfg.method + "'");
    }

    const std::size_t best = select_checkpoint(
        trained.checkpoints, cfg.validation_instances,
        [&cfg](const Generator& g, std::size_t i) {
            return validation_successes<Adapter>(cfg, g, i) > 0;
        });
    const Generator& selected = trained.checkpoints[best].second;

    std::ostringstream curve;
    curve << csv_prologue(cfg, "epoch,d_loss,g_loss");
    for (const auto& e : trained.curve)
        curve << e.epoch << "," << csv_double(e.d_loss) << "," << csv_double(e.g_loss)
              << "\n";

    RunManifest manifest{cfg.config_hash, {}};
    emit_file(cfg, manifest, model_file_name(cfg.method, Adapter::tag, cfg.episodes),
              generator_to_string(selected));
    emit_file(cfg, manifest,
              "curve_" + cfg.method + "_" + Adapter::tag + "_ep" +
                  std::to_string(cfg.episodes) + ".csv",
              curve.str());
    emit_manifest(cfg, manifest,
                  "manifest_train_" + cfg.method + "_" + Adapter::tag + ".txt");
}

inline void cmd_train(const ExperimentConfig& cfg) {
    if (cfg.domain == "binpack")
        train_impl<BinpackAdapter>(cfg);
    else if (cfg.domain == "reconfig")
        train_impl<ReconfigAdapter>(cfg);
    else
        throw std::invalid_argument("train: unsupported domain '" + cfg.domain + "'");
}

// ---------------------------------------------------------------------------
// cmd_eval

template <class Adapter>
void eval_impl(const ExperimentConfig& cfg) {
    std::ostringstream results;
    results << csv_prologue(cfg, "sampler,episodes,trials,successes,rate,ci_low,ci_high");
    const auto dir = std::filesystem::path(cfg.out_dir);

    for (long episodes : cfg.episode_counts) {
        for (const std::string& tag : cfg.samplers) {
            Generator model;
            const bool learned = tag != "uniform";
            if (learned)
                model = load_generator_file(
                    (dir / model_file_name(tag, Adapter::tag,
                                           static_cast<std::size_t>(episodes)))
                        .string());
            std::vector<bool> outcomes;
            for (std::size_t i = 0; i < cfg.eval_trials; ++i) {
                // same instance stream for every sampler: paired comparison
                Rng inst_rng(Rng::derive(cfg.seed, "eval-inst", i));
                Rng search_rng(Rng::derive(
                    cfg.seed, "eval-run-" + tag + "-ep" + std::to_string(episodes), i));
                auto setup = Adapter::make(inst_rng);
                auto sampler = learned ? Adapter::model_sampler(setup.domain, model)
                                       : Adapter::uniform_sampler(setup.domain);
                auto result = search(setup.domain, setup.initial, cfg.k, sampler,
                                     {cfg.eval_budget}, search_rng, cfg.path_cost_weight);
                outcomes.push_back(result.outcome == SearchOutcome::solved);
            }
            const auto st = success_stats(outcomes);
            results << tag << "," << episodes << "," << st.trials << "," << st.successes
                    << "," << csv_double(st.rate) << "," << csv_double(st.ci_low) << ","
                    << csv_double(st.ci_high) << "\n";
        }
    }

    RunManifest manifest{cfg.config_hash, {}};
    emit_file(cfg, manifest, std::string("results_") + Adapter::tag + ".csv", results.str());
    emit_manifest(cfg, manifest, std::string("manifest_eval_") + Adapter::tag + ".txt");
}

inline void cmd_eval(const ExperimentConfig& cfg) {
    if (cfg.domain == "binpack")
        eval_impl<BinpackAdapter>(cfg);
    else if (cfg.domain == "reconfig")
        eval_impl<ReconfigAdapter>(cfg);
    else
        throw std::invalid_argument("eval: unsupported domain '" + cfg.domain + "'");
}

// ---------------------------------------------------------------------------
// cmd_verify: returns the number of bound violations (0 = success).

inline std::size_t cmd_verify(const ExperimentConfig& cfg) {
    std::ostringstream report;
    report << csv_prologue(cfg, "instance_id,epsilon,rho,lhs1,bound1,lhs2,bound2,holds");
    std::size_t violations = 0;
    std::size_t id = 0;

    auto add_row = [&](const DiscreteInstance& inst) {
        const auto c1 = verify_theorem1(inst);
        const auto c2 = verify_theorem2(inst);
        const bool holds = c1.holds && c2.holds;
        if (!holds) ++violations;
        report << id++ << "," << csv_double(inst.epsilon) << "," << csv_double(inst.rho())
               << "," << csv_double(c1.lhs) << "," << csv_double(c1.bound) << ","
               << csv_double(c2.lhs) << "," << csv_double(c2.bound) << ","
               << (holds ? 1 : 0) << "\n";
    };

    // tightness rows: exact weights give lhs = bound = 0
    for (std::size_t i = 0; i < 10; ++i) {
        Rng rng(Rng::derive(cfg.seed, "verify-tight", i));
        add_row(random_discrete_instance(rng, /*exact_weights=*/true));
    }
    for (std::size_t i = 0; i < cfg.verify_instances; ++i) {
        Rng rng(Rng::derive(cfg.seed, "verify-inst", i));
        add_row(random_discrete_instance(rng));
    }

    std::ostringstream lemma;
    lemma << csv_prologue(cfg, "instance_id,max_deviation");
    for (std::size_t i = 0; i < cfg.lemma_instances; ++i) {
        Rng rng(Rng::derive(cfg.seed, "verify-lemma", i));
        auto inst = random_discrete_instance(rng);
        std::vector<double> pg(inst.size());
        for (auto& v : pg) v = rng.uniform(0.0, 2.0);
        const double dev = verify_lemma1(inst, pg);
        if (dev > 1e-6) ++violations;
        lemma << i << "," << csv_double(dev) << "\n";
    }

    RunManifest manifest{cfg.config_hash, {}};
    emit_file(cfg, manifest, "verify_bounds.csv", report.str());
    emit_file(cfg, manifest, "verify_lemma.csv", lemma.str());
    emit_manifest(cfg, manifest, "manifest_verify.txt");
    return violations;
}

// ---------------------------------------------------------------------------
// cmd_toy: the illustrative mixture pipeline, emitted as point-cloud CSVs.

struct ToyArtifacts {
    std::vector<LabeledSample> on, off;
    GandiResult pipeline;
    std::size_t selected_checkpoint = 0;
    std::vector<std::array<double, 2>> generated;
};

inline ToyArtifacts run_toy_pipeline(const ExperimentConfig& cfg) {
    const auto p = gmm_p();
    const auto q = gmm_q();
    ToyArtifacts art;
    Rng data_rng(Rng::derive(cfg.seed, "toy-data", 0));
    for (std::size_t i = 0; i < cfg.toy_on; ++i) {
        const auto s = p.sample(data_rng);
        art.on.push_back({{}, {s[0], s[1]}, SampleLabel::on_target});
    }
    for (std::size_t i = 0; i < cfg.toy_off; ++i) {
        const auto s = q.sample(data_rng);
        art.off.push_back({{}, {s[0], s[1]}, SampleLabel::off_target});
    }

    GandiConfig gcfg;
    gcfg.train.batch_size = cfg.batch_size;
    gcfg.train.max_epochs = cfg.toy_epochs;
    gcfg.train.checkpoint_every = cfg.checkpoint_every;
    gcfg.importance.batch_size = cfg.batch_size;
    gcfg.importance.max_epochs = cfg.importance_epochs;
    gcfg.importance.action_box = gmm_box();
    Rng train_rng(Rng::derive(cfg.seed, "toy-train", 0));
    art.pipeline = gandi(art.on, art.off, gcfg, train_rng);

    // checkpoint selection: closest (KDE KL) to the bootstrapped reference
    std::vector<std::array<double, 2>> reference;
    for (const auto& s : art.pipeline.bootstrapped) reference.push_back({s.action[0], s.action[1]});
    const auto& checkpoints = art.pipeline.gan.checkpoints;
    double best_kl = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
        Rng probe(Rng::derive(cfg.seed, "toy-probe", c));
        std::vector<std::array<double, 2>> cloud;
        for (int i = 0; i < 1000; ++i) {
            const auto a = sample_action(checkpoints[c].second, {}, probe);
            cloud.push_back({a[0], a[1]});
        }
        const double kl = kde_kl_estimate(reference, cloud);
        if (kl < best_kl) {
            best_kl = kl;
            art.selected_checkpoint = c;
        }
    }

    Rng gen_rng(Rng::derive(cfg.seed, "toy-generate", 0));
    const auto& g = checkpoints[art.selected_checkpoint].second;
    for (std::size_t i = 0; i < cfg.toy_generated; ++i) {
        const auto a = sample_action(g, {}, gen_rng);
        art.generated.push_back({a[0], a[1]});
    }
    return art;
}

inline void cmd_toy(const ExperimentConfig& cfg) {
    const auto art = run_toy_pipeline(cfg);
    const auto p = gmm_p();
    const auto q = gmm_q();
    const auto box = gmm_box();

    std::ostringstream grid;
    grid << csv_prologue(cfg, "x,y,p_density,q_density");
    for (std::size_t iy = 0; iy < cfg.toy_grid; ++iy)
        for (std::size_t ix = 0; ix < cfg.toy_grid; ++ix) {
            const double x = box.lo[0] + (box.hi[0] - box.lo[0]) *
                                             (static_cast<double>(ix) + 0.5) /
                                             static_cast<double>(cfg.toy_grid);
            const double y = box.lo[1] + (box.hi[1] - box.lo[1]) *
                                             (static_cast<double>(iy) + 0.5) /
                                             static_cast<double>(cfg.toy_grid);
            grid << csv_double(x) << "," << csv_double(y) << "," << csv_double(p.density(x, y))
                 << "," << csv_double(q.density(x, y)) << "\n";
        }

    std::ostringstream samples;
    samples << csv_prologue(cfg, "x,y,label");
    for (const auto* set : {&art.on, &art.off})
        for (const auto& s : *set)
            samples << csv_double(s.action[0]) << "," << csv_double(s.action[1]) << ","
                    << to_string(s.label) << "\n";

    std::ostringstream weighted;
    weighted << csv_prologue(cfg, "x,y,weight");
    for (const auto& s : art.off)
        weighted << csv_double(s.action[0]) << "," << csv_double(s.action[1]) << ","
                 << csv_double(art.pipeline.importance.weight(s)) << "\n";

    std::ostringstream boot;
    boot << csv_prologue(cfg, "x,y");
    for (const auto& s : art.pipeline.bootstrapped)
        boot << csv_double(s.action[0]) << "," << csv_double(s.action[1]) << "\n";

    std::ostringstream gen;
    gen << csv_prologue(cfg, "x,y");
    for (const auto& a : art.generated)
        gen << csv_double(a[0]) << "," << csv_double(a[1]) << "\n";

    RunManifest manifest{cfg.config_hash, {}};
    emit_file(cfg, manifest, "toy_density_grid.csv", grid.str());
    emit_file(cfg, manifest, "toy_samples.csv", samples.str());
    emit_file(cfg, manifest, "toy_weighted.csv", weighted.str());
    emit_file(cfg, manifest, "toy_bootstrapped.csv", boot.str());
    emit_file(cfg, manifest, "toy_generated.csv", gen.str());
    emit_manifest(cfg, manifest, "manifest_toy.txt");
}

} // namespace gandi
