#include "tripletrack/app/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "tripletrack/io/numbers.hpp"

namespace tripletrack::app {

namespace {

void require(bool ok, const std::string& message) {
    if (!ok) throw std::invalid_argument(message);
}

struct Field {
    std::string name;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

std::string format(double v) { return io::format_double(v); }
std::string format(int v) { return std::to_string(v); }
std::string format(std::int64_t v) { return std::to_string(v); }
std::string format(std::uint64_t v) { return std::to_string(v); }
std::string format(bool v) { return v ? "true" : "false"; }

void parse(const std::string& s, double& out) { out = io::parse_double(s); }
void parse(const std::string& s, int& out) {
    const long long v = io::parse_int(s);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
        throw std::invalid_argument("integer out of range");
    }
    out = static_cast<int>(v);
}
void parse(const std::string& s, std::int64_t& out) { out = io::parse_int(s); }
void parse(const std::string& s, std::uint64_t& out) {
    const long long v = io::parse_int(s);
    if (v < 0) throw std::invalid_argument("must be non-negative");
    out = static_cast<std::uint64_t>(v);
}
void parse(const std::string& s, bool& out) {
    if (s == "true" || s == "1") {
        out = true;
    } else if (s == "false" || s == "0") {
        out = false;
    } else {
        throw std::invalid_argument("expected true or false");
    }
}

template <typename Access>
Field field(std::string name, Access access) {
    return {name,
            [access](RunConfig& c, const std::string& text) { parse(text, access(c)); },
            [access](const RunConfig& c) { return format(access(const_cast<RunConfig&>(c))); }};
}

#define TT_FIELD(key, member) field(key, [](RunConfig& c) -> auto& { return c.member; })

template <typename Enum>
Field enum_field(std::string name, std::function<Enum&(RunConfig&)> access,
                 std::vector<std::pair<std::string, Enum>> names) {
    return {name,
            [access, names](RunConfig& c, const std::string& text) {
                for (const auto& [n, v] : names) {
                    if (n == text) {
                        access(c) = v;
                        return;
                    }
                }
                std::string options;
                for (const auto& [n, v] : names) options += (options.empty() ? "" : ", ") + n;
                throw std::invalid_argument("expected one of: " + options);
            },
            [access, names](const RunConfig& c) {
                const Enum v = access(const_cast<RunConfig&>(c));
                for (const auto& [n, e] : names) {
                    if (e == v) return n;
                }
                return std::string("?");
            }};
}

void add_optimizer(std::vector<Field>& f, const std::string& section, nn::RmspropConfig& (*access)(RunConfig&)) {
    f.push_back(field(section + ".learning_rate", [access](RunConfig& c) -> auto& { return access(c).learning_rate; }));
    f.push_back(field(section + ".rmsprop_decay", [access](RunConfig& c) -> auto& { return access(c).decay; }));
    f.push_back(field(section + ".rmsprop_epsilon", [access](RunConfig& c) -> auto& { return access(c).epsilon; }));
    f.push_back(
        field(section + ".lr_decay_factor", [access](RunConfig& c) -> auto& { return access(c).lr_decay_factor; }));
    f.push_back(field(section + ".lr_decay_every", [access](RunConfig& c) -> auto& { return access(c).lr_decay_every; }));
}

const std::vector<Field>& fields() {
    static const std::vector<Field> table = [] {
        std::vector<Field> f{
            TT_FIELD("run.seed", seed),
            TT_FIELD("scene.identities", scene.identities),
            TT_FIELD("scene.frames", scene.frames),
            TT_FIELD("scene.descriptor_dim", scene.descriptor_dim),
            TT_FIELD("scene.min_track_length", scene.min_track_length),
            TT_FIELD("scene.appearance_noise", scene.appearance_noise),
            TT_FIELD("scene.appearance_clusters", scene.appearance_clusters),
            TT_FIELD("scene.cluster_spread", scene.cluster_spread),
            TT_FIELD("scene.position_noise", scene.position_noise),
            TT_FIELD("scene.drop_rate", scene.drop_rate),
            TT_FIELD("scene.false_positive_rate", scene.false_positive_rate),
            TT_FIELD("scene.occlusion_rate", scene.occlusion_rate),
            TT_FIELD("scene.occlusion_duration", scene.occlusion_duration),
            TT_FIELD("scene.box_min_width", scene.box_min.w),
            TT_FIELD("scene.box_min_height", scene.box_min.h),
            TT_FIELD("scene.box_max_width", scene.box_max.w),
            TT_FIELD("scene.box_max_height", scene.box_max.h),
            TT_FIELD("dynamics.speed_mean", scene.motion.speed_mean),
            TT_FIELD("dynamics.speed_spread", scene.motion.speed_spread),
            TT_FIELD("dynamics.accel_noise", scene.motion.accel_noise),
            TT_FIELD("dynamics.curvature_amplitude", scene.motion.curvature_amplitude),
            TT_FIELD("dynamics.curvature_period", scene.motion.curvature_period),
            TT_FIELD("dynamics.max_speed", scene.motion.max_speed),
            TT_FIELD("image.width", image.width),
            TT_FIELD("image.height", image.height),
            TT_FIELD("id.hidden_dim", id.hidden_dim),
            TT_FIELD("id.feature_dim", id.feature_dim),
            TT_FIELD("id.iterations", id_train.iterations),
            TT_FIELD("id.batch_size", id_train.batch_size),
            TT_FIELD("id.log_every", id_train.log_every),
            TT_FIELD("id.validation_fraction", id_train.validation_fraction),
        };
        add_optimizer(f, "id", [](RunConfig& c) -> nn::RmspropConfig& { return c.id_train.optimizer; });
        for (auto&& x : {
                 TT_FIELD("motion.hidden_dim", motion.hidden_dim),
                 TT_FIELD("motion.window", motion.window),
                 TT_FIELD("motion.iterations", motion_train.iterations),
                 TT_FIELD("motion.batch_size", motion_train.batch_size),
                 TT_FIELD("motion.log_every", motion_train.log_every),
                 TT_FIELD("motion.init_stddev", motion_train.init_stddev),
                 TT_FIELD("motion.top_bias_stddev", motion_train.top_bias_stddev),
                 TT_FIELD("motion.groups", motion_data.groups),
                 TT_FIELD("motion.group_size", motion_data.group_size),
                 TT_FIELD("motion.trajectory_length", motion_data.length),
                 TT_FIELD("motion.group_radius", motion_data.group_radius),
                 TT_FIELD("motion.jitter", motion_data.jitter),
                 TT_FIELD("motion.validation_groups", motion_data.validation_groups),
             }) {
            f.push_back(x);
        }
        add_optimizer(f, "motion", [](RunConfig& c) -> nn::RmspropConfig& { return c.motion_train.optimizer; });
        for (auto&& x : {
                 TT_FIELD("metric.embedding_dim", metric.embedding_dim),
                 TT_FIELD("metric.appearance", metric.channels.appearance),
                 TT_FIELD("metric.motion", metric.channels.motion),
                 TT_FIELD("metric.tau", metric_train.triplet.tau),
                 TT_FIELD("metric.iterations", metric_train.iterations),
                 TT_FIELD("metric.log_every", metric_train.log_every),
                 TT_FIELD("metric.identities_per_batch", metric_train.batch.identities_per_batch),
                 TT_FIELD("metric.instances_per_identity", metric_train.batch.instances_per_identity),
                 TT_FIELD("metric.verification_hidden", verification_hidden),
             }) {
            f.push_back(x);
        }
        f.push_back(enum_field<nn::TripletForm>(
            "metric.triplet_form", [](RunConfig& c) -> nn::TripletForm& { return c.metric_train.triplet.form; },
            {{"positive_negative", nn::TripletForm::positive_negative},
             {"anchor_negative", nn::TripletForm::anchor_negative}}));
        f.push_back(enum_field<nn::DistanceKind>(
            "metric.distance", [](RunConfig& c) -> nn::DistanceKind& { return c.metric_train.triplet.distance; },
            {{"euclidean", nn::DistanceKind::euclidean}, {"squared", nn::DistanceKind::squared}}));
        add_optimizer(f, "metric", [](RunConfig& c) -> nn::RmspropConfig& { return c.metric_train.optimizer; });
        f.push_back(enum_field<GateRule>(
            "tracker.gate_rule", [](RunConfig& c) -> GateRule& { return c.tracker.gate_rule; },
            {{"balanced", GateRule::balanced}, {"percentile", GateRule::percentile}, {"fixed", GateRule::fixed}}));
        for (auto&& x : {
                 TT_FIELD("tracker.max_age", tracker.lifecycle.max_age),
                 TT_FIELD("tracker.init_hits", tracker.lifecycle.init_hits),
                 TT_FIELD("tracker.gate", tracker.gate.gate),
                 TT_FIELD("tracker.young_position_gate", tracker.gate.young_position_gate),
                 TT_FIELD("tracker.gate_percentile", tracker.gate_percentile),
                 TT_FIELD("tracker.verification_gate", tracker.verification_gate),
                 TT_FIELD("tracker.baseline_min_iou", tracker.baseline_min_iou),
                 TT_FIELD("evaluation.iou_threshold", evaluation.iou_threshold),
                 TT_FIELD("evaluation.held_out_batches", evaluation.held_out_batches),
                 TT_FIELD("evaluation.verification_positive_pairs", evaluation.verification_positive_pairs),
                 TT_FIELD("evaluation.verification_negative_pairs", evaluation.verification_negative_pairs),
                 TT_FIELD("evaluation.verification_threshold", evaluation.verification_threshold),
                 TT_FIELD("evaluation.seeds", evaluation.seeds),
                 TT_FIELD("evaluation.sweep_min_window", evaluation.sweep_min_window),
                 TT_FIELD("evaluation.sweep_max_window", evaluation.sweep_max_window),
             }) {
            f.push_back(x);
        }
        return f;
    }();
    return table;
}

#undef TT_FIELD

}  // namespace

void RunConfig::validate() const {
    scene.validate();
    image.validate();
    id.validate();
    id_train.validate();
    motion.validate();
    motion_train.validate();
    metric.validate();
    metric_train.validate();
    tracker.lifecycle.validate();
    tracker.gate.validate();
    require(id.descriptor_dim == scene.descriptor_dim, "id.descriptor_dim must equal scene.descriptor_dim");
    require(id.identities == scene.identities, "id.identities must equal scene.identities");
    require(motion_data.groups > 0 && motion_data.group_size > 1,
            "motion.groups must be positive and motion.group_size >= 2");
    require(motion_data.length > motion.window, "motion.trajectory_length must exceed motion.window");
    require(motion_data.group_radius >= 0.0 && motion_data.group_radius < 0.45,
            "motion.group_radius must lie in [0, 0.45)");
    require(motion_data.jitter >= 0.0, "motion.jitter must be >= 0");
    require(motion_data.validation_groups >= 0, "motion.validation_groups must be >= 0");
    require(metric_train.batch.identities_per_batch < scene.identities,
            "metric.identities_per_batch must be below scene.identities (negatives need another identity)");
    require(scene.min_track_length > motion.window + 1,
            "scene.min_track_length must exceed motion.window + 1 so every identity yields triplets");
    require(verification_hidden > 0, "metric.verification_hidden must be positive");
    require(tracker.gate_percentile > 0.0 && tracker.gate_percentile <= 1.0,
            "tracker.gate_percentile must lie in (0, 1]");
    require(tracker.verification_gate >= 0.0 && tracker.verification_gate <= 1.0,
            "tracker.verification_gate must lie in [0, 1]");
    require(tracker.baseline_min_iou > 0.0 && tracker.baseline_min_iou <= 1.0,
            "tracker.baseline_min_iou must lie in (0, 1]");
    require(evaluation.iou_threshold > 0.0 && evaluation.iou_threshold < 1.0,
            "evaluation.iou_threshold must lie in (0, 1)");
    require(evaluation.held_out_batches > 0, "evaluation.held_out_batches must be positive");
    require(evaluation.verification_positive_pairs > 0 && evaluation.verification_negative_pairs > 0,
            "evaluation verification pair counts must be positive");
    require(evaluation.verification_threshold > 0.0, "evaluation.verification_threshold must be > 0");
    require(evaluation.seeds > 0, "evaluation.seeds must be positive");
    require(evaluation.sweep_min_window >= 1 && evaluation.sweep_max_window >= evaluation.sweep_min_window,
            "evaluation sweep windows must satisfy 1 <= sweep_min_window <= sweep_max_window");
    require(scene.min_track_length > evaluation.sweep_max_window + 1,
            "scene.min_track_length must exceed evaluation.sweep_max_window + 1");
}

RunConfig parse_config(const std::string& text) {
    boost::property_tree::ptree tree;
    std::istringstream in(text);
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw std::invalid_argument("config: " + e.message() + " (line " + std::to_string(e.line()) + ")");
    }
    std::map<std::string, const Field*> index;
    for (const auto& f : fields()) index[f.name] = &f;

    RunConfig config;
    for (const auto& [section, sub] : tree) {
        if (sub.empty()) {
            throw std::invalid_argument("config: key '" + section + "' must be inside a [section]");
        }
        for (const auto& [key, value] : sub) {
            const std::string name = section + "." + key;
            auto it = index.find(name);
            if (it == index.end()) throw std::invalid_argument("config: unknown key '" + name + "'");
            try {
                it->second->set(config, value.data());
            } catch (const std::exception& e) {
                throw std::invalid_argument("config: bad value '" + value.data() + "' for '" + name + "': " + e.what());
            }
        }
    }
    config.id.descriptor_dim = config.scene.descriptor_dim;
    config.id.identities = config.scene.identities;
    config.validate();
    return config;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config(ss.str());
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(path.string() + ": " + e.what());
    }
}

std::string config_to_ini(const RunConfig& config) {
    std::string out, section;
    for (const auto& f : fields()) {
        const auto dot = f.name.find('.');
        const std::string s = f.name.substr(0, dot);
        if (s != section) {
            if (!section.empty()) out += '\n';
            out += "[" + s + "]\n";
            section = s;
        }
        out += f.name.substr(dot + 1) + " = " + f.get(config) + "\n";
    }
    return out;
}

std::vector<std::string> config_keys() {
    std::vector<std::string> out;
    for (const auto& f : fields()) out.push_back(f.name);
    return out;
}

}  // namespace tripletrack::app
