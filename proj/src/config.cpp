#include "charm/config.hpp"

#include <set>

#include <nlohmann/json.hpp>

#include "charm/error.hpp"
#include "charm/io.hpp"

namespace charm {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

// Typed access to one JSON object with unknown-key rejection.
class Section {
  public:
    Section(const json& j, std::string path, std::set<std::string> allowed) : j_(j), path_(std::move(path)) {
        require(j_.is_object(), ErrorKind::Config, "config: '" + display() + "' must be an object");
        for (const auto& [key, _] : j_.items()) {
            require(allowed.count(key) != 0, ErrorKind::Config, "config: unknown key '" + qualify(key) + "'");
        }
    }

    bool has(const std::string& key) const { return j_.contains(key); }
    const json& raw(const std::string& key) const { return j_.at(key); }
    std::string qualify(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    template <typename T>
    bool get(const std::string& key, T& out) const {
        if (!j_.contains(key)) return false;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception&) {
            fail(ErrorKind::Config, "config: key '" + qualify(key) + "' has the wrong type");
        }
        return true;
    }

  private:
    std::string display() const { return path_.empty() ? "<root>" : path_; }
    const json& j_;
    std::string path_;
};

char parse_delimiter(const std::string& s, const std::string& key) {
    if (s == "tab" || s == "\t") return '\t';
    if (s == "whitespace" || s == " ") return ' ';
    require(s.size() == 1, ErrorKind::Config, "config: '" + key + "' must be a single character, 'tab' or 'whitespace'");
    return s[0];
}

std::string delimiter_name(char c) {
    if (c == '\t') return "tab";
    if (c == ' ') return "whitespace";
    return std::string(1, c);
}

void parse_schema(const Section& s, SchemaConfig& schema) {
    std::string delim;
    if (s.get("delimiter", delim)) schema.delimiter = parse_delimiter(delim, s.qualify("delimiter"));
    s.get("header_rows", schema.header_rows);
    s.get("channel_columns", schema.channel_columns);
    if (s.has("channel_columns") && !s.has("channel_names")) schema.channel_names.clear();
    s.get("channel_names", schema.channel_names);
    s.get("high_label_column", schema.high_label_column);
    s.get("low_label_columns", schema.low_label_columns);
    s.get("user_id", schema.user_id);
    s.get("null_label_token", schema.null_label_token);
    s.get("label_map", schema.label_map);
    s.get("low_label_maps", schema.low_label_maps);
    s.get("sample_rate_hz", schema.sample_rate_hz);
}

void parse_synth(const Section& s, SynthConfig& synth) {
    s.get("sample_rate_hz", synth.sample_rate_hz);
    s.get("channels", synth.channels);
    s.get("samples_per_class_per_user", synth.samples_per_class_per_user);
    s.get("seed", synth.seed);
    s.get("null_gap", synth.null_gap);
    s.get("low_track", synth.low_track);
    s.get("null_label", synth.null_label);
    if (s.has("motifs")) {
        const json& arr = s.raw("motifs");
        require(arr.is_array(), ErrorKind::Config, "config: 'synth.motifs' must be an array");
        synth.motifs.clear();
        for (std::size_t i = 0; i < arr.size(); ++i) {
            Section m(arr[i], "synth.motifs[" + std::to_string(i) + "]",
                      {"name", "min_duration", "max_duration", "channels"});
            MotifSpec spec;
            m.get("name", spec.name);
            m.get("min_duration", spec.min_duration);
            m.get("max_duration", spec.max_duration);
            if (m.has("channels")) {
                const json& ch = m.raw("channels");
                require(ch.is_array(), ErrorKind::Config, "config: '" + m.qualify("channels") + "' must be an array");
                for (std::size_t c = 0; c < ch.size(); ++c) {
                    Section w(ch[c], m.qualify("channels") + "[" + std::to_string(c) + "]",
                              {"amplitude", "frequency_hz", "phase", "offset"});
                    Waveform wave;
                    w.get("amplitude", wave.amplitude);
                    w.get("frequency_hz", wave.frequency_hz);
                    w.get("phase", wave.phase);
                    w.get("offset", wave.offset);
                    spec.channels.push_back(wave);
                }
            }
            synth.motifs.push_back(std::move(spec));
        }
    }
    if (s.has("grammars")) {
        const json& arr = s.raw("grammars");
        require(arr.is_array(), ErrorKind::Config, "config: 'synth.grammars' must be an array");
        synth.grammars.clear();
        for (std::size_t i = 0; i < arr.size(); ++i) {
            Section g(arr[i], "synth.grammars[" + std::to_string(i) + "]", {"name", "target_length", "motifs"});
            ActivityGrammar grammar;
            g.get("name", grammar.name);
            g.get("target_length", grammar.target_length);
            g.get("motifs", grammar.motifs);
            synth.grammars.push_back(std::move(grammar));
        }
    }
    if (s.has("users")) {
        const json& arr = s.raw("users");
        require(arr.is_array(), ErrorKind::Config, "config: 'synth.users' must be an array");
        synth.users.clear();
        for (std::size_t i = 0; i < arr.size(); ++i) {
            Section u(arr[i], "synth.users[" + std::to_string(i) + "]", {"id", "amplitude_scale", "noise_sigma"});
            UserProfile user;
            u.get("id", user.id);
            u.get("amplitude_scale", user.amplitude_scale);
            u.get("noise_sigma", user.noise_sigma);
            synth.users.push_back(std::move(user));
        }
    }
}

}  // namespace

void RunConfig::validate() const {
    (void)label_set();
    schema.validate();
    synth.validate();
    charm.validate();
    mlp.validate();
    train.validate();
    require(charm.channels == schema.channel_columns.size(), ErrorKind::Config,
            "config: charm.channels must equal the number of schema channel columns");
    require(charm.classes == classes.size() && mlp.classes == classes.size(), ErrorKind::Config,
            "config: model class count must equal the number of classes");
    require(sequence_length == charm.sequence_length(), ErrorKind::Config,
            "config: data.sequence_length must equal charm.window * charm.windows");
    require(mlp.sequence_length == sequence_length && mlp.channels == charm.channels, ErrorKind::Config,
            "config: mlp input shape must match the data");
    require(stride >= 1, ErrorKind::Config, "config: data.stride must be at least 1");
}

RunConfig default_run_config() { return parse_run_config("{}"); }

RunConfig parse_run_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        fail(ErrorKind::Config, std::string("config: invalid JSON: ") + e.what());
    }
    Section top(root, "", {"classes", "schema", "data", "model", "charm", "mlp", "train", "synth"});

    RunConfig c;
    c.synth = default_synth_config();
    if (top.has("synth")) parse_synth(Section(top.raw("synth"), "synth",
                                              {"sample_rate_hz", "channels", "samples_per_class_per_user", "seed",
                                               "null_gap", "low_track", "null_label", "motifs", "grammars", "users"}),
                                      c.synth);

    c.classes = c.synth.class_names();
    top.get("classes", c.classes);

    c.schema = synth_schema(c.synth);
    if (top.has("schema")) {
        parse_schema(Section(top.raw("schema"), "schema",
                             {"delimiter", "header_rows", "channel_columns", "channel_names", "high_label_column",
                              "low_label_columns", "user_id", "null_label_token", "label_map", "low_label_maps",
                              "sample_rate_hz"}),
                     c.schema);
    }

    std::string model = "charm";
    top.get("model", model);
    c.model = parse_model_kind(model);

    c.charm.windows = 32;
    c.charm.channels = c.schema.channel_columns.size();
    c.charm.classes = c.classes.size();
    if (top.has("charm")) {
        Section s(top.raw("charm"), "charm",
                  {"window", "windows", "channels", "low_hidden", "low_out", "high_hidden", "classes", "dropout_p",
                   "leaky_slope", "low_output_activation"});
        s.get("window", c.charm.window);
        s.get("windows", c.charm.windows);
        s.get("channels", c.charm.channels);
        s.get("low_hidden", c.charm.low_hidden);
        s.get("low_out", c.charm.low_out);
        s.get("high_hidden", c.charm.high_hidden);
        s.get("classes", c.charm.classes);
        s.get("dropout_p", c.charm.dropout_p);
        s.get("leaky_slope", c.charm.leaky_slope);
        s.get("low_output_activation", c.charm.low_output_activation);
    }

    c.sequence_length = c.charm.sequence_length();
    c.stride = 0;
    if (top.has("data")) {
        Section s(top.raw("data"), "data", {"sequence_length", "stride"});
        s.get("sequence_length", c.sequence_length);
        s.get("stride", c.stride);
    }
    if (c.stride == 0) c.stride = std::max<std::size_t>(1, c.sequence_length / 2);

    c.mlp.sequence_length = c.sequence_length;
    c.mlp.channels = c.charm.channels;
    c.mlp.classes = c.classes.size();
    if (top.has("mlp")) {
        Section s(top.raw("mlp"), "mlp", {"layers", "hidden", "dropout_p", "leaky_slope"});
        s.get("layers", c.mlp.layers);
        s.get("hidden", c.mlp.hidden);
        s.get("dropout_p", c.mlp.dropout_p);
        s.get("leaky_slope", c.mlp.leaky_slope);
    }

    if (top.has("train")) {
        Section s(top.raw("train"), "train", {"epochs", "batch_size", "lr", "seed", "shuffle"});
        s.get("epochs", c.train.epochs);
        s.get("batch_size", c.train.batch_size);
        s.get("lr", c.train.lr);
        s.get("seed", c.train.seed);
        s.get("shuffle", c.train.shuffle);
    }
    c.validate();
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const Error& e) {
        fail(ErrorKind::Config, e.what());
    }
    return parse_run_config(text);
}

std::string dump_run_config(const RunConfig& c) {
    ojson j;
    j["classes"] = c.classes;
    ojson schema;
    schema["delimiter"] = delimiter_name(c.schema.delimiter);
    schema["header_rows"] = c.schema.header_rows;
    schema["channel_columns"] = c.schema.channel_columns;
    schema["channel_names"] = c.schema.channel_names;
    schema["high_label_column"] = c.schema.high_label_column;
    schema["low_label_columns"] = c.schema.low_label_columns;
    schema["user_id"] = c.schema.user_id;
    schema["null_label_token"] = c.schema.null_label_token;
    schema["label_map"] = c.schema.label_map;
    schema["low_label_maps"] = c.schema.low_label_maps;
    schema["sample_rate_hz"] = c.schema.sample_rate_hz;
    j["schema"] = schema;
    j["data"] = {{"sequence_length", c.sequence_length}, {"stride", c.stride}};
    j["model"] = std::string(to_string(c.model));
    j["charm"] = {{"window", c.charm.window},
                  {"windows", c.charm.windows},
                  {"channels", c.charm.channels},
                  {"low_hidden", c.charm.low_hidden},
                  {"low_out", c.charm.low_out},
                  {"high_hidden", c.charm.high_hidden},
                  {"classes", c.charm.classes},
                  {"dropout_p", c.charm.dropout_p},
                  {"leaky_slope", c.charm.leaky_slope},
                  {"low_output_activation", c.charm.low_output_activation}};
    j["mlp"] = {{"layers", c.mlp.layers},
                {"hidden", c.mlp.hidden},
                {"dropout_p", c.mlp.dropout_p},
                {"leaky_slope", c.mlp.leaky_slope}};
    j["train"] = {{"epochs", c.train.epochs},
                  {"batch_size", c.train.batch_size},
                  {"lr", c.train.lr},
                  {"seed", c.train.seed},
                  {"shuffle", c.train.shuffle}};
    ojson synth;
    synth["sample_rate_hz"] = c.synth.sample_rate_hz;
    synth["channels"] = c.synth.channels;
    synth["samples_per_class_per_user"] = c.synth.samples_per_class_per_user;
    synth["seed"] = c.synth.seed;
    synth["null_gap"] = c.synth.null_gap;
    synth["low_track"] = c.synth.low_track;
    synth["null_label"] = c.synth.null_label;
    ojson motifs = ojson::array();
    for (const auto& m : c.synth.motifs) {
        ojson channels = ojson::array();
        for (const auto& w : m.channels) {
            channels.push_back({{"amplitude", w.amplitude},
                                {"frequency_hz", w.frequency_hz},
                                {"phase", w.phase},
                                {"offset", w.offset}});
        }
        motifs.push_back({{"name", m.name},
                          {"min_duration", m.min_duration},
                          {"max_duration", m.max_duration},
                          {"channels", channels}});
    }
    synth["motifs"] = motifs;
    ojson grammars = ojson::array();
    for (const auto& g : c.synth.grammars) {
        grammars.push_back({{"name", g.name}, {"target_length", g.target_length}, {"motifs", g.motifs}});
    }
    synth["grammars"] = grammars;
    ojson users = ojson::array();
    for (const auto& u : c.synth.users) {
        users.push_back({{"id", u.id}, {"amplitude_scale", u.amplitude_scale}, {"noise_sigma", u.noise_sigma}});
    }
    synth["users"] = users;
    j["synth"] = synth;
    return j.dump(2) + "\n";
}

}  // namespace charm
