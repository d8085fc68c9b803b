#include "alp/config.hpp"

#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace alp {

using nlohmann::json;

namespace {

std::string join(const std::string& prefix, const std::string& key) {
    return prefix.empty() ? key : prefix + "." + key;
}

// Reads fields of one JSON object and remembers which keys were consumed so
// the leftovers can be reported as unknown.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    const json* find(const std::string& key) {
        seen_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    std::string path(const std::string& key) const { return join(path_, key); }

    void read(const std::string& key, int& out) {
        if (const json* v = find(key)) {
            if (!v->is_number_integer()) throw ConfigError(path(key), "expected an integer");
            const auto x = v->get<std::int64_t>();
            if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
                throw ConfigError(path(key), "integer out of range");
            out = static_cast<int>(x);
        }
    }

    void read(const std::string& key, std::uint64_t& out) {
        if (const json* v = find(key)) {
            if (!v->is_number_integer() || (v->is_number_integer() && !v->is_number_unsigned() &&
                                             v->get<std::int64_t>() < 0))
                throw ConfigError(path(key), "expected a non-negative integer");
            out = v->get<std::uint64_t>();
        }
    }

    void read(const std::string& key, std::size_t& out, std::nullptr_t) {
        std::uint64_t tmp = out;
        read(key, tmp);
        out = static_cast<std::size_t>(tmp);
    }

    void read(const std::string& key, double& out) {
        if (const json* v = find(key)) {
            if (!v->is_number()) throw ConfigError(path(key), "expected a number");
            out = v->get<double>();
        }
    }

    void read(const std::string& key, std::string& out) {
        if (const json* v = find(key)) {
            if (!v->is_string()) throw ConfigError(path(key), "expected a string");
            out = v->get<std::string>();
        }
    }

    // null means unset
    void read(const std::string& key, std::optional<double>& out) {
        if (const json* v = find(key)) {
            if (v->is_null()) {
                out.reset();
            } else if (v->is_number()) {
                out = v->get<double>();
            } else {
                throw ConfigError(path(key), "expected a number or null");
            }
        }
    }

    template <typename T>
    void read(const std::string& key, std::vector<T>& out) {
        if (const json* v = find(key)) {
            if (!v->is_array()) throw ConfigError(path(key), "expected an array");
            std::vector<T> values;
            for (const auto& e : *v) {
                if constexpr (std::is_integral_v<T>) {
                    if (!e.is_number_integer()) throw ConfigError(path(key), "expected integers");
                } else {
                    if (!e.is_number()) throw ConfigError(path(key), "expected numbers");
                }
                values.push_back(e.get<T>());
            }
            out = std::move(values);
        }
    }

    template <typename Fn>
    void read_object(const std::string& key, Fn&& fn) {
        if (const json* v = find(key)) {
            ObjectReader sub(*v, path(key));
            fn(sub);
            sub.finish();
        }
    }

    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            if (!seen_.count(key)) throw ConfigError(path(key), "unknown config key");
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

template <typename Fn>
void rethrow_as_config_error(const std::string& key, Fn&& fn) {
    try {
        fn();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        // Validators phrase errors as "dotted.key: message".
        const std::string msg = e.what();
        const auto colon = msg.find(": ");
        if (colon != std::string::npos && msg.find(' ') > colon)
            throw ConfigError(msg.substr(0, colon), msg.substr(colon + 2));
        throw ConfigError(key, msg);
    }
}

}  // namespace

json config_to_json(const ExperimentConfig& c) {
    const TrainConfig& t = c.train;
    const ObjectiveConfig& o = t.objective;
    const auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    json j;
    j["seed"] = c.seed;
    j["workers"] = c.workers;
    j["output_dir"] = c.output_dir;
    j["train"] = {
        {"steps", t.steps},
        {"batch_tasks", t.batch_tasks},
        {"k_rollouts", t.k_rollouts},
        {"learning_rate", t.learning_rate},
        {"checkpoint_every", t.checkpoint_every},
        {"advantage_kind", to_string(t.advantage_kind)},
    };
    j["objective"] = {
        {"variant", to_string(o.variant)},
        {"beta", o.beta},
        {"clip_floor", opt(o.clip_floor)},
        {"norm_constant", o.norm_constant ? json(*o.norm_constant) : json("none")},
        {"variant_param", opt(o.variant_param)},
    };
    j["env"] = {
        {"ceiling_slope", t.env.ceiling_slope},
        {"length_scale_base", t.env.length_scale_base},
        {"length_scale_rate", t.env.length_scale_rate},
        {"feature_noise_sd", t.env.feature_noise_sd},
        {"mixture_hard_fraction", t.env.mixture_hard_fraction},
    };
    j["policy"] = {{"bins", t.bins}, {"feature_dim", t.feature_dim}};
    j["eval"] = {
        {"n_tasks", c.eval.n_tasks},
        {"n_samples", c.eval.n_samples},
        {"sweep_fractions", c.eval.sweep_fractions},
        {"sweep_tasks", c.eval.sweep_tasks},
        {"sweep_samples", c.eval.sweep_samples},
    };
    return j;
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    TrainConfig& t = c.train;
    ObjectReader root(j, "");
    root.read("seed", c.seed);
    root.read("workers", c.workers);
    root.read("output_dir", c.output_dir);
    root.read_object("train", [&](ObjectReader& r) {
        r.read("steps", t.steps);
        r.read("batch_tasks", t.batch_tasks);
        r.read("k_rollouts", t.k_rollouts);
        r.read("learning_rate", t.learning_rate);
        r.read("checkpoint_every", t.checkpoint_every);
        std::string kind = to_string(t.advantage_kind);
        r.read("advantage_kind", kind);
        rethrow_as_config_error(r.path("advantage_kind"),
                                [&] { t.advantage_kind = parse_advantage_kind(kind); });
    });
    root.read_object("objective", [&](ObjectReader& r) {
        ObjectiveConfig& o = t.objective;
        std::string variant = to_string(o.variant);
        r.read("variant", variant);
        rethrow_as_config_error(r.path("variant"),
                                [&] { o.variant = parse_objective_variant(variant); });
        r.read("beta", o.beta);
        r.read("clip_floor", o.clip_floor);
        if (const json* v = r.find("norm_constant")) {
            if (v->is_string() && v->get<std::string>() == "none")
                o.norm_constant.reset();
            else if (v->is_number())
                o.norm_constant = v->get<double>();
            else
                throw ConfigError(r.path("norm_constant"), "expected a number or \"none\"");
        }
        r.read("variant_param", o.variant_param);
    });
    root.read_object("env", [&](ObjectReader& r) {
        r.read("ceiling_slope", t.env.ceiling_slope);
        r.read("length_scale_base", t.env.length_scale_base);
        r.read("length_scale_rate", t.env.length_scale_rate);
        r.read("feature_noise_sd", t.env.feature_noise_sd);
        r.read("mixture_hard_fraction", t.env.mixture_hard_fraction);
    });
    root.read_object("policy", [&](ObjectReader& r) {
        r.read("bins", t.bins);
        r.read("feature_dim", t.feature_dim, nullptr);
    });
    root.read_object("eval", [&](ObjectReader& r) {
        r.read("n_tasks", c.eval.n_tasks);
        r.read("n_samples", c.eval.n_samples);
        r.read("sweep_fractions", c.eval.sweep_fractions);
        r.read("sweep_tasks", c.eval.sweep_tasks);
        r.read("sweep_samples", c.eval.sweep_samples);
    });
    root.finish();

    t.seed = c.seed;
    t.env.seed = c.seed;
    t.objective.k_rollouts = t.k_rollouts;
    return c;
}

void ExperimentConfig::validate() const {
    if (workers < 1) throw ConfigError("workers", "must be >= 1");
    rethrow_as_config_error("train", [&] { train.validate(); });
    if (eval.n_tasks < 1) throw ConfigError("eval.n_tasks", "must be >= 1");
    if (eval.n_samples < 1) throw ConfigError("eval.n_samples", "must be >= 1");
    if (eval.sweep_tasks < 1) throw ConfigError("eval.sweep_tasks", "must be >= 1");
    if (eval.sweep_samples < 1) throw ConfigError("eval.sweep_samples", "must be >= 1");
    for (double f : eval.sweep_fractions)
        if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("eval.sweep_fractions", "fractions must lie in [0, 1]");
}

void apply_override(json& doc, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0)
        throw ConfigError(std::string(assignment), "override must look like key=value");
    const std::string key(assignment.substr(0, eq));
    const std::string raw(assignment.substr(eq + 1));
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;

    json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) throw ConfigError(key, "malformed key");
        if (!node->is_object()) throw ConfigError(key, "cannot descend into a non-object");
        if (dot == std::string::npos) {
            (*node)[part] = std::move(value);
            return;
        }
        node = &(*node)[part];
        if (node->is_null()) *node = json::object();
        start = dot + 1;
    }
}

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
    json doc = json::object();
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot read config file '" + path + "'");
        std::stringstream buffer;
        buffer << in.rdbuf();
        doc = json::parse(buffer.str(), nullptr, false);
        if (doc.is_discarded()) throw ConfigError(path, "config file is not valid JSON");
    }
    for (const auto& o : overrides) apply_override(doc, o);
    ExperimentConfig config = config_from_json(doc);
    config.validate();
    return config;
}

}  // namespace alp
