#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "dca/binary.hpp"
#include "dca/csv.hpp"
#include "dca/discrete.hpp"
#include "dca/errors.hpp"
#include "dca/fdcheck.hpp"
#include "dca/optim.hpp"
#include "dca/pgm.hpp"
#include "dca/rng.hpp"
#include "dca/rule_io.hpp"
#include "dca/step.hpp"
#include "dca/topology.hpp"

namespace dca {

enum class ExperimentMode { simulate, train, gradcheck, interpolate };

inline const char* mode_name(ExperimentMode mode) {
    switch (mode) {
        case ExperimentMode::simulate: return "simulate";
        case ExperimentMode::train: return "train";
        case ExperimentMode::gradcheck: return "gradcheck";
        case ExperimentMode::interpolate: return "interpolate";
    }
    return "?";
}

struct RuleSource {
    enum class Kind { wolfram, file, weights, probs, init, interpolate };
    Kind kind = Kind::wolfram;
    int wolfram_number = 0;
    std::string file;
    std::vector<double> weights;                  // flattened rows
    std::vector<double> probs;                    // binary P(black) per pattern
    std::string parameterization = "sigmoid";     // weights / init
    std::string init = "zero";                    // zero | normal
    double init_stddev = 0.1;
    std::pair<int, int> endpoints{0, 0};          // interpolation pair
};

struct InitialSource {
    enum class Kind { bits, file, random };
    Kind kind = Kind::random;
    std::string bits;
    std::string file;
    std::size_t count = 1;
};

struct TargetConfig {
    std::string kind = "majority";  // majority | rule | fixed
    int wolfram_number = -1;
    std::string file;
    std::string bits;
};

// One declarative experiment: everything the CLI runs comes through here,
// and the resolved form is dumped next to the outputs for reproducibility.
struct ExperimentConfig {
    ExperimentMode mode = ExperimentMode::simulate;
    std::size_t ring_size = 0;
    std::vector<int> offsets{-1, 0, 1};
    RuleSource rule;
    InitialSource initial;
    std::size_t steps = 1;
    std::size_t render_steps = 0;  // 0 means: use steps
    std::uint64_t seed = 0;
    std::vector<double> alphas;
    TargetConfig target;
    TrainOptions optimizer;
    std::size_t iterations = 0;
    GradCheckSettings gradcheck;
    std::string out_dir = ".";
    std::string diagram = "diagram.pgm";
    std::string loss_csv = "loss.csv";
    std::string rule_out = "trained.rule";
    std::string before_diagram = "before.pgm";
    std::string after_diagram = "after.pgm";
};

struct ExperimentResult {
    std::vector<std::string> files_written;
    double final_loss = std::numeric_limits<double>::quiet_NaN();
    std::optional<GradCheckReport> gradcheck;
};

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& j, const std::string& key) {
    if (!j.contains(key)) throw ValidationError("config: missing '" + key + "'");
    return j.at(key);
}

template <class T>
T get_as(const nlohmann::json& j, const std::string& key) {
    try {
        return j.get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ValidationError("config: bad value for '" + key + "'");
    }
}

template <class T>
T field(const nlohmann::json& j, const std::string& key) {
    return get_as<T>(require_field(j, key), key);
}

template <class T>
T field_or(const nlohmann::json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    return get_as<T>(j.at(key), key);
}

// json silently wraps negative integers into unsigned targets; reject them
inline std::uint64_t get_nonneg(const nlohmann::json& v, const std::string& key) {
    if (!v.is_number_integer() ||
        (!v.is_number_unsigned() && get_as<long long>(v, key) < 0))
        throw ValidationError("config: '" + key + "' must be a nonnegative integer");
    return v.get<std::uint64_t>();
}

inline std::size_t nonneg_field(const nlohmann::json& j, const std::string& key) {
    return static_cast<std::size_t>(get_nonneg(require_field(j, key), key));
}

inline std::size_t nonneg_field_or(const nlohmann::json& j, const std::string& key,
                                   std::size_t fallback) {
    if (!j.contains(key)) return fallback;
    return static_cast<std::size_t>(get_nonneg(j.at(key), key));
}

inline RuleSource parse_rule_source(const nlohmann::json& j) {
    RuleSource source;
    int kinds = 0;
    if (j.contains("wolfram")) {
        source.kind = RuleSource::Kind::wolfram;
        source.wolfram_number = get_as<int>(j.at("wolfram"), "wolfram");
        ++kinds;
    }
    if (j.contains("file")) {
        source.kind = RuleSource::Kind::file;
        source.file = get_as<std::string>(j.at("file"), "file");
        ++kinds;
    }
    if (j.contains("weights")) {
        source.kind = RuleSource::Kind::weights;
        source.weights = get_as<std::vector<double>>(j.at("weights"), "weights");
        ++kinds;
    }
    if (j.contains("probs")) {
        source.kind = RuleSource::Kind::probs;
        source.probs = get_as<std::vector<double>>(j.at("probs"), "probs");
        ++kinds;
    }
    if (j.contains("init")) {
        source.kind = RuleSource::Kind::init;
        source.init = get_as<std::string>(j.at("init"), "init");
        if (source.init != "zero" && source.init != "normal")
            throw ValidationError("config: rule init must be 'zero' or 'normal'");
        ++kinds;
    }
    if (j.contains("interpolate")) {
        source.kind = RuleSource::Kind::interpolate;
        const auto& inner = j.at("interpolate");
        auto endpoints = get_as<std::vector<int>>(require_field(inner, "endpoints"),
                                                  "endpoints");
        if (endpoints.size() != 2)
            throw ValidationError("config: interpolation needs exactly two endpoints");
        source.endpoints = {endpoints[0], endpoints[1]};
        ++kinds;
    }
    if (kinds != 1)
        throw ValidationError(
            "config: rule needs exactly one of wolfram/file/weights/probs/init/interpolate");
    source.parameterization =
        field_or<std::string>(j, "parameterization", source.parameterization);
    if (source.parameterization != "softmax" && source.parameterization != "sigmoid")
        throw ValidationError("config: unknown parameterization tag");
    source.init_stddev = field_or<double>(j, "stddev", source.init_stddev);
    return source;
}

inline InitialSource parse_initial_source(const nlohmann::json& j) {
    InitialSource source;
    int kinds = 0;
    if (j.contains("bits")) {
        source.kind = InitialSource::Kind::bits;
        source.bits = get_as<std::string>(j.at("bits"), "bits");
        ++kinds;
    }
    if (j.contains("file")) {
        source.kind = InitialSource::Kind::file;
        source.file = get_as<std::string>(j.at("file"), "file");
        ++kinds;
    }
    if (j.contains("random")) {
        source.kind = InitialSource::Kind::random;
        source.count = static_cast<std::size_t>(get_nonneg(j.at("random"), "random"));
        if (source.count == 0)
            throw ValidationError("config: initial random count must be positive");
        ++kinds;
    }
    if (kinds != 1)
        throw ValidationError("config: initial needs exactly one of bits/file/random");
    return source;
}

inline TargetConfig parse_target(const nlohmann::json& j) {
    TargetConfig target;
    target.kind = field<std::string>(j, "kind");
    if (target.kind == "majority") return target;
    if (target.kind == "rule") {
        if (j.contains("wolfram"))
            target.wolfram_number = get_as<int>(j.at("wolfram"), "wolfram");
        else if (j.contains("file"))
            target.file = get_as<std::string>(j.at("file"), "file");
        else
            throw ValidationError("config: rule target needs 'wolfram' or 'file'");
        return target;
    }
    if (target.kind == "fixed") {
        target.bits = field<std::string>(j, "bits");
        return target;
    }
    throw ValidationError("config: unknown target kind: " + target.kind);
}

}  // namespace detail

inline ExperimentConfig parse_experiment_config(const nlohmann::json& j,
                                                ExperimentMode mode) {
    ExperimentConfig config;
    config.mode = mode;
    if (j.contains("mode")) {
        const auto declared = detail::get_as<std::string>(j.at("mode"), "mode");
        if (declared != mode_name(mode))
            throw ValidationError("config: mode '" + declared +
                                  "' does not match subcommand '" + mode_name(mode) + "'");
    }

    if (mode != ExperimentMode::gradcheck) {
        const auto& topology = detail::require_field(j, "topology");
        config.ring_size = detail::nonneg_field(topology, "ring_size");
        if (config.ring_size == 0)
            throw ValidationError("config: ring_size must be positive");
        config.offsets =
            detail::field_or<std::vector<int>>(topology, "offsets", config.offsets);
        if (config.offsets.empty())
            throw ValidationError("config: offsets must not be empty");
    }

    if (j.contains("seed")) config.seed = detail::get_nonneg(j.at("seed"), "seed");
    config.steps = detail::nonneg_field_or(j, "steps", config.steps);
    config.render_steps = detail::nonneg_field_or(j, "render_steps", 0);
    config.out_dir = detail::field_or<std::string>(j, "out_dir", config.out_dir);

    if (j.contains("outputs")) {
        const auto& outputs = j.at("outputs");
        config.diagram = detail::field_or<std::string>(outputs, "diagram", config.diagram);
        config.loss_csv = detail::field_or<std::string>(outputs, "loss_csv", config.loss_csv);
        config.rule_out = detail::field_or<std::string>(outputs, "rule", config.rule_out);
        config.before_diagram =
            detail::field_or<std::string>(outputs, "before_diagram", config.before_diagram);
        config.after_diagram =
            detail::field_or<std::string>(outputs, "after_diagram", config.after_diagram);
    }

    switch (mode) {
        case ExperimentMode::simulate:
            config.rule = detail::parse_rule_source(detail::require_field(j, "rule"));
            if (config.rule.kind == RuleSource::Kind::interpolate)
                throw ValidationError("config: use the interpolate mode for rule pairs");
            config.initial =
                detail::parse_initial_source(detail::require_field(j, "initial"));
            break;
        case ExperimentMode::interpolate: {
            config.rule = detail::parse_rule_source(detail::require_field(j, "rule"));
            if (config.rule.kind != RuleSource::Kind::interpolate)
                throw ValidationError("config: interpolate mode needs rule.interpolate");
            config.initial =
                detail::parse_initial_source(detail::require_field(j, "initial"));
            config.alphas = detail::field<std::vector<double>>(j, "alphas");
            if (config.alphas.empty())
                throw ValidationError("config: alphas must not be empty");
            for (double alpha : config.alphas)
                if (!(alpha >= 0.0 && alpha <= 1.0))
                    throw ValidationError("config: alpha values must lie in [0,1]");
            break;
        }
        case ExperimentMode::gradcheck: {
            config.gradcheck.seed = config.seed;
            if (j.contains("gradcheck")) {
                const auto& section = j.at("gradcheck");
                auto& settings = config.gradcheck;
                settings.instances =
                    detail::nonneg_field_or(section, "instances", settings.instances);
                settings.rel_tolerance =
                    detail::field_or<double>(section, "tolerance", settings.rel_tolerance);
                settings.abs_floor =
                    detail::field_or<double>(section, "abs_floor", settings.abs_floor);
                settings.step_size =
                    detail::field_or<double>(section, "fd_step", settings.step_size);
                settings.min_ring =
                    detail::nonneg_field_or(section, "min_ring", settings.min_ring);
                settings.max_ring =
                    detail::nonneg_field_or(section, "max_ring", settings.max_ring);
                settings.min_steps =
                    detail::nonneg_field_or(section, "min_steps", settings.min_steps);
                settings.max_steps =
                    detail::nonneg_field_or(section, "max_steps", settings.max_steps);
            }
            break;
        }
        case ExperimentMode::train: {
            config.rule = detail::parse_rule_source(detail::require_field(j, "rule"));
            if (config.rule.kind == RuleSource::Kind::wolfram ||
                config.rule.kind == RuleSource::Kind::probs ||
                config.rule.kind == RuleSource::Kind::interpolate)
                throw ValidationError("config: training needs a weight-backed rule "
                                      "(weights, init, or a weight rule file)");
            config.initial =
                detail::parse_initial_source(detail::require_field(j, "initial"));
            if (config.steps == 0)
                throw ValidationError("config: training needs steps >= 1");
            config.target = detail::parse_target(detail::require_field(j, "target"));
            const auto& optimizer = detail::require_field(j, "optimizer");
            config.optimizer.descent_rate = detail::field_or<double>(
                optimizer, "descent_rate", config.optimizer.descent_rate);
            config.optimizer.momentum =
                detail::field_or<double>(optimizer, "momentum", config.optimizer.momentum);
            config.iterations = detail::nonneg_field(optimizer, "iterations");
            if (!(config.optimizer.descent_rate > 0.0))
                throw ValidationError("config: descent_rate must be positive");
            if (!(config.optimizer.momentum >= 0.0 && config.optimizer.momentum < 1.0))
                throw ValidationError("config: momentum must be in [0,1)");
            break;
        }
    }
    return config;
}

inline ExperimentConfig load_experiment_config(const std::string& path,
                                               ExperimentMode mode) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("config: " + std::string(e.what()));
    }
    return parse_experiment_config(j, mode);
}

inline void apply_overrides(ExperimentConfig& config, std::optional<std::size_t> steps,
                            std::optional<std::uint64_t> seed,
                            std::optional<std::string> out_dir) {
    if (steps) config.steps = *steps;
    if (seed) {
        config.seed = *seed;
        config.gradcheck.seed = *seed;
    }
    if (out_dir) config.out_dir = *out_dir;
}

inline nlohmann::json effective_config_json(const ExperimentConfig& config) {
    nlohmann::json j;
    j["mode"] = mode_name(config.mode);
    j["seed"] = config.seed;
    j["steps"] = config.steps;
    j["out_dir"] = config.out_dir;
    if (config.mode != ExperimentMode::gradcheck)
        j["topology"] = {{"ring_size", config.ring_size}, {"offsets", config.offsets}};

    if (config.mode == ExperimentMode::gradcheck) {
        j["gradcheck"] = {{"instances", config.gradcheck.instances},
                          {"tolerance", config.gradcheck.rel_tolerance},
                          {"abs_floor", config.gradcheck.abs_floor},
                          {"fd_step", config.gradcheck.step_size},
                          {"min_ring", config.gradcheck.min_ring},
                          {"max_ring", config.gradcheck.max_ring},
                          {"min_steps", config.gradcheck.min_steps},
                          {"max_steps", config.gradcheck.max_steps}};
        return j;
    }

    nlohmann::json rule;
    switch (config.rule.kind) {
        case RuleSource::Kind::wolfram: rule["wolfram"] = config.rule.wolfram_number; break;
        case RuleSource::Kind::file: rule["file"] = config.rule.file; break;
        case RuleSource::Kind::weights:
            rule["weights"] = config.rule.weights;
            rule["parameterization"] = config.rule.parameterization;
            break;
        case RuleSource::Kind::probs: rule["probs"] = config.rule.probs; break;
        case RuleSource::Kind::init:
            rule["init"] = config.rule.init;
            rule["parameterization"] = config.rule.parameterization;
            rule["stddev"] = config.rule.init_stddev;
            break;
        case RuleSource::Kind::interpolate:
            rule["interpolate"] = {
                {"endpoints", {config.rule.endpoints.first, config.rule.endpoints.second}}};
            break;
    }
    j["rule"] = rule;

    nlohmann::json initial;
    switch (config.initial.kind) {
        case InitialSource::Kind::bits: initial["bits"] = config.initial.bits; break;
        case InitialSource::Kind::file: initial["file"] = config.initial.file; break;
        case InitialSource::Kind::random: initial["random"] = config.initial.count; break;
    }
    j["initial"] = initial;

    if (config.mode == ExperimentMode::interpolate) j["alphas"] = config.alphas;
    if (config.mode == ExperimentMode::train) {
        nlohmann::json target;
        target["kind"] = config.target.kind;
        if (config.target.kind == "rule") {
            if (config.target.wolfram_number >= 0)
                target["wolfram"] = config.target.wolfram_number;
            else
                target["file"] = config.target.file;
        }
        if (config.target.kind == "fixed") target["bits"] = config.target.bits;
        j["target"] = target;
        j["optimizer"] = {{"descent_rate", config.optimizer.descent_rate},
                          {"momentum", config.optimizer.momentum},
                          {"iterations", config.iterations}};
        j["render_steps"] = config.render_steps ? config.render_steps : config.steps;
        j["outputs"] = {{"loss_csv", config.loss_csv},
                        {"rule", config.rule_out},
                        {"before_diagram", config.before_diagram},
                        {"after_diagram", config.after_diagram}};
    } else {
        j["outputs"] = {{"diagram", config.diagram}};
    }
    return j;
}

namespace detail {

inline DiscreteState state_from_bits(const std::string& bits, const Alphabet& alphabet,
                                     std::size_t ring_size) {
    if (bits.size() != ring_size)
        throw ValidationError("initial bit string length does not match ring size");
    DiscreteState state(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) {
        const std::string label(1, bits[i]);
        if (!alphabet.contains(label))
            throw ValidationError("initial bit string has unknown symbol '" + label + "'");
        state[i] = alphabet.index_of(label);
    }
    return state;
}

inline Configuration configuration_from_file(const std::string& path,
                                             std::size_t ring_size,
                                             std::size_t symbol_count) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open initial configuration file: " + path);
    Configuration config(ring_size, symbol_count);
    std::string line;
    std::size_t line_no = 0;
    std::size_t cell = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto tokens = split_tokens(line);
        if (tokens.empty()) continue;
        if (cell >= ring_size) throw ParseError("more rows than ring cells", line_no);
        if (tokens.size() != symbol_count)
            throw ParseError("expected " + std::to_string(symbol_count) +
                                 " probabilities per row",
                             line_no);
        for (std::size_t a = 0; a < symbol_count; ++a)
            config.at(cell, a) = parse_double(tokens[a], line_no);
        try {
            validate_distribution(config.cell(cell));
        } catch (const std::invalid_argument& e) {
            throw ParseError(e.what(), line_no);
        }
        ++cell;
    }
    if (cell != ring_size)
        throw ParseError("expected " + std::to_string(ring_size) + " rows", line_no);
    return config;
}

inline LoadedRule load_rule_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open rule file: " + path);
    return load_rule(in);
}

// General-engine rule for simulate/interpolate; binary sources go through
// the exact weight bridge.
inline RuleTable resolve_rule_table(const RuleSource& source, const Topology& topology,
                                    Rng& rng) {
    const std::size_t arity = topology.arity();
    switch (source.kind) {
        case RuleSource::Kind::wolfram: {
            if (arity != 3)
                throw ValidationError("wolfram rules need offsets [-1, 0, 1]");
            return RuleTable::deterministic(Alphabet::binary(),
                                            wolfram_to_rule(source.wolfram_number));
        }
        case RuleSource::Kind::file: {
            LoadedRule loaded = load_rule_file(source.file);
            if (loaded.offsets != topology.offsets())
                throw ValidationError("rule file offsets do not match topology");
            if (loaded.is_binary()) return to_rule_table(loaded.binary());
            return loaded.table();
        }
        case RuleSource::Kind::weights: {
            if (source.parameterization == "sigmoid")
                return to_rule_table(BinaryRule::from_weights(arity, source.weights));
            return RuleTable(Alphabet::binary(), arity, source.weights);
        }
        case RuleSource::Kind::probs:
            return to_rule_table(BinaryRule::from_probs(arity, source.probs));
        case RuleSource::Kind::init: {
            const std::size_t count =
                source.parameterization == "sigmoid" ? pattern_count(2, arity)
                                                     : 2 * pattern_count(2, arity);
            std::vector<double> weights =
                source.init == "zero" ? std::vector<double>(count, 0.0)
                                      : random_normal_weights(rng, count, source.init_stddev);
            if (source.parameterization == "sigmoid")
                return to_rule_table(BinaryRule::from_weights(arity, std::move(weights)));
            return RuleTable(Alphabet::binary(), arity, std::move(weights));
        }
        case RuleSource::Kind::interpolate:
            throw ValidationError("interpolation pair is not a single rule");
    }
    throw ValidationError("unreachable rule source");
}

inline void write_file(const std::filesystem::path& path, const std::string& bytes,
                       std::vector<std::string>& files_written) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write file: " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    files_written.push_back(path.string());
}

inline std::string alpha_file_name(const std::string& stem_name, double alpha) {
    const std::filesystem::path base(stem_name);
    char suffix[32];
    std::snprintf(suffix, sizeof suffix, "_alpha%g", alpha);
    return (base.parent_path() /
            (base.stem().string() + suffix + base.extension().string()))
        .string();
}

inline Configuration build_initial_configuration(const InitialSource& source,
                                                 const Alphabet& alphabet,
                                                 std::size_t ring_size, Rng& rng) {
    switch (source.kind) {
        case InitialSource::Kind::bits:
            return Configuration::delta(state_from_bits(source.bits, alphabet, ring_size),
                                        alphabet.size());
        case InitialSource::Kind::file:
            return configuration_from_file(source.file, ring_size, alphabet.size());
        case InitialSource::Kind::random:
        default:
            return random_delta_configuration(rng, ring_size, alphabet.size());
    }
}

}  // namespace detail

inline ExperimentResult run_experiment(const ExperimentConfig& config,
                                       std::ostream& log = std::cout) {
    ExperimentResult result;
    const std::filesystem::path out_dir(config.out_dir);
    std::filesystem::create_directories(out_dir);

    {
        std::ostringstream buffer;
        buffer << effective_config_json(config).dump(2) << "\n";
        detail::write_file(out_dir / "effective-config.json", buffer.str(),
                           result.files_written);
    }

    Rng rng(config.seed);

    if (config.mode == ExperimentMode::gradcheck) {
        const GradCheckReport report = run_gradcheck(config.gradcheck);
        result.gradcheck = report;
        log << "gradcheck: " << report.instances << " instances, max relative error "
            << std::max(report.max_config_gradient_error, report.max_loss_gradient_error)
            << " (configuration " << report.max_config_gradient_error << ", loss "
            << report.max_loss_gradient_error << "), tolerance " << report.tolerance
            << "\n";
        if (!report.pass)
            throw NumericalError("gradcheck exceeded tolerance");
        log << "gradcheck: PASS\n";
        return result;
    }

    const Topology topology(config.ring_size, config.offsets);
    const Alphabet alphabet = Alphabet::binary();

    if (config.mode == ExperimentMode::simulate ||
        config.mode == ExperimentMode::interpolate) {
        if (config.initial.kind == InitialSource::Kind::random &&
            config.initial.count != 1)
            throw ValidationError("this mode takes exactly one initial configuration");

        if (config.mode == ExperimentMode::simulate) {
            // the rule decides the alphabet the initial configuration lives in
            const RuleTable rule = detail::resolve_rule_table(config.rule, topology, rng);
            const Configuration initial = detail::build_initial_configuration(
                config.initial, rule.alphabet(), config.ring_size, rng);
            auto trajectory = dca_run(rule, initial, topology, config.steps);
            detail::write_file(out_dir / config.diagram,
                               render_pgm(make_diagram(std::move(trajectory))),
                               result.files_written);
            log << "simulate: wrote " << config.diagram << " (" << config.ring_size
                << "x" << config.steps + 1 << ")\n";
            return result;
        }

        const Configuration initial = detail::build_initial_configuration(
            config.initial, alphabet, config.ring_size, rng);
        const DiscreteRule left = wolfram_to_rule(config.rule.endpoints.first);
        const DiscreteRule right = wolfram_to_rule(config.rule.endpoints.second);
        if (topology.arity() != 3)
            throw ValidationError("interpolation endpoints need offsets [-1, 0, 1]");
        for (double alpha : config.alphas) {
            // pointwise blend of the two 0/1 tables, evolved on the scalar
            // engine: it derives the white probability per use and so never
            // drifts off the simplex, even for long figures
            std::vector<double> probs(left.outputs.size());
            for (std::size_t code = 0; code < probs.size(); ++code)
                probs[code] = (1.0 - alpha) * static_cast<double>(left.outputs[code]) +
                              alpha * static_cast<double>(right.outputs[code]);
            const BinaryRule rule = BinaryRule::from_probs(3, probs);
            auto trajectory =
                binary_run(rule, to_binary_config(initial), topology, config.steps);
            const std::string name = detail::alpha_file_name(config.diagram, alpha);
            detail::write_file(out_dir / name,
                               render_pgm(make_diagram(trajectory)),
                               result.files_written);
            log << "interpolate: wrote " << name << "\n";
        }
        return result;
    }

    // train; a rule file picks the engine itself, otherwise the declared
    // parameterization does
    std::optional<LoadedRule> loaded_rule;
    if (config.rule.kind == RuleSource::Kind::file) {
        loaded_rule = detail::load_rule_file(config.rule.file);
        if (loaded_rule->offsets != topology.offsets())
            throw ValidationError("rule file offsets do not match topology");
    }
    const bool binary_engine = loaded_rule ? loaded_rule->is_binary()
                                           : config.rule.parameterization == "sigmoid";
    const auto make_target = [&](const Alphabet& rule_alphabet) -> TargetSpec {
        if (config.target.kind == "majority") return MajorityTarget{};
        if (config.target.kind == "fixed")
            return FixedTarget{Configuration::delta(
                detail::state_from_bits(config.target.bits, rule_alphabet,
                                        config.ring_size),
                rule_alphabet.size())};
        if (config.target.wolfram_number >= 0)
            return RuleTarget{wolfram_to_rule(config.target.wolfram_number)};
        LoadedRule loaded = detail::load_rule_file(config.target.file);
        if (loaded.is_binary()) return RuleTarget{loaded.binary().thresholded()};
        return RuleTarget{loaded.table().argmax_rule()};
    };

    const std::size_t render_steps =
        config.render_steps ? config.render_steps : config.steps;
    const auto log_progress = [&](std::size_t iteration, double batch_loss) {
        const std::size_t stride =
            config.iterations > 10 ? config.iterations / 10 : 1;
        if (iteration % stride == 0 || iteration + 1 == config.iterations)
            log << "train: iteration " << iteration << ", batch loss " << batch_loss
                << "\n";
    };

    // weight init draws come before the batch draws from the same root seed
    if (binary_engine) {
        BinaryRule rule = [&] {
            switch (config.rule.kind) {
                case RuleSource::Kind::weights:
                    return BinaryRule::from_weights(topology.arity(), config.rule.weights);
                case RuleSource::Kind::file:
                    return loaded_rule->binary();
                case RuleSource::Kind::init:
                default: {
                    const std::size_t count = pattern_count(2, topology.arity());
                    return BinaryRule::from_weights(
                        topology.arity(),
                        config.rule.init == "zero"
                            ? std::vector<double>(count, 0.0)
                            : random_normal_weights(rng, count, config.rule.init_stddev));
                }
            }
        }();
        if (!rule.weight_backed())
            throw ValidationError("training needs a weight-backed rule");
        const TargetSpec target = make_target(alphabet);

        BinaryTrainState state{rule, topology, {}, config.optimizer, config.seed, {}, 0};
        state.velocity.assign(rule.weight_count(), 0.0);
        switch (config.initial.kind) {
            case InitialSource::Kind::bits:
                state.batch.push_back(BinaryConfig::delta(detail::state_from_bits(
                    config.initial.bits, alphabet, config.ring_size)));
                break;
            case InitialSource::Kind::file:
                state.batch.push_back(to_binary_config(detail::configuration_from_file(
                    config.initial.file, config.ring_size, 2)));
                break;
            case InitialSource::Kind::random:
                for (std::size_t i = 0; i < config.initial.count; ++i)
                    state.batch.push_back(
                        BinaryConfig::delta(random_state(rng, config.ring_size, 2)));
                break;
        }

        const BinaryRule before = state.rule;
        const TrainHistory history =
            train(state, config.steps, target, config.iterations, log_progress);

        detail::write_file(out_dir / config.loss_csv, loss_csv_string(history.loss),
                           result.files_written);
        {
            std::ostringstream buffer;
            save_rule(state.rule, topology.offsets(), buffer);
            detail::write_file(out_dir / config.rule_out, buffer.str(),
                               result.files_written);
        }
        detail::write_file(
            out_dir / config.before_diagram,
            render_pgm(make_diagram(binary_run(before, state.batch.front(), topology,
                                               render_steps))),
            result.files_written);
        detail::write_file(
            out_dir / config.after_diagram,
            render_pgm(make_diagram(binary_run(state.rule, state.batch.front(), topology,
                                               render_steps))),
            result.files_written);
        result.final_loss = history.loss.empty()
                                ? std::numeric_limits<double>::quiet_NaN()
                                : history.loss.back();
        log << "train: done, final batch loss "
            << (history.loss.empty() ? 0.0 : history.loss.back()) << "\n";
        return result;
    }

    RuleTable rule = loaded_rule ? loaded_rule->table()
                                 : detail::resolve_rule_table(config.rule, topology, rng);
    if (!rule.weight_backed())
        throw ValidationError("training needs a weight-backed rule");
    const TargetSpec target = make_target(rule.alphabet());
    GeneralTrainState state{rule, topology, {}, config.optimizer, config.seed, {}, 0};
    state.velocity.assign(rule.weight_count(), 0.0);
    if (config.initial.kind == InitialSource::Kind::random) {
        for (std::size_t i = 0; i < config.initial.count; ++i)
            state.batch.push_back(random_delta_configuration(rng, config.ring_size,
                                                             rule.symbol_count()));
    } else {
        state.batch.push_back(detail::build_initial_configuration(
            config.initial, rule.alphabet(), config.ring_size, rng));
    }

    const RuleTable before = state.rule;
    const TrainHistory history =
        train(state, config.steps, target, config.iterations, log_progress);

    detail::write_file(out_dir / config.loss_csv, loss_csv_string(history.loss),
                       result.files_written);
    {
        std::ostringstream buffer;
        save_rule(state.rule, topology.offsets(), buffer);
        detail::write_file(out_dir / config.rule_out, buffer.str(), result.files_written);
    }
    detail::write_file(out_dir / config.before_diagram,
                       render_pgm(make_diagram(
                           dca_run(before, state.batch.front(), topology, render_steps))),
                       result.files_written);
    detail::write_file(out_dir / config.after_diagram,
                       render_pgm(make_diagram(dca_run(state.rule, state.batch.front(),
                                                       topology, render_steps))),
                       result.files_written);
    result.final_loss = history.loss.empty() ? std::numeric_limits<double>::quiet_NaN()
                                             : history.loss.back();
    log << "train: done, final batch loss "
        << (history.loss.empty() ? 0.0 : history.loss.back()) << "\n";
    return result;
}

}  // namespace dca
