#include <bit>
#include <cstring>
#include <map>
#include <sstream>

#include "charm/error.hpp"
#include "charm/io.hpp"
#include "charm/model.hpp"

namespace charm {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

void append_le(std::string& out, std::uint64_t bits) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

std::uint64_t read_le(std::string_view bytes) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[i])) << (8 * i);
    return v;
}

[[noreturn]] void corrupt(const std::string& what) { fail(ErrorKind::Checkpoint, "corrupt checkpoint: " + what); }

std::string join_doubles(const std::vector<double>& v) {
    std::string s = std::to_string(v.size());
    for (double x : v) s += " " + format_double(x);
    return s;
}

// key -> remaining tokens of its header line
using Header = std::map<std::string, std::vector<std::string>>;

const std::vector<std::string>& field(const Header& h, const std::string& key) {
    auto it = h.find(key);
    if (it == h.end() || it->second.empty()) corrupt("missing header field '" + key + "'");
    return it->second;
}

std::size_t size_field(const Header& h, const std::string& key) {
    const auto& f = field(h, key);
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(f[0], &pos);
        if (pos != f[0].size()) throw std::invalid_argument(key);
        return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
        corrupt("header field '" + key + "' is not an integer");
    }
}

double double_field(const Header& h, const std::string& key) {
    try {
        return parse_double(field(h, key)[0]);
    } catch (const Error&) {
        corrupt("header field '" + key + "' is not a number");
    }
}

std::vector<double> doubles_field(const Header& h, const std::string& key) {
    const auto& f = field(h, key);
    const std::size_t n = size_field(h, key);
    if (f.size() != n + 1) corrupt("header field '" + key + "' has the wrong number of values");
    std::vector<double> out;
    try {
        for (std::size_t i = 1; i < f.size(); ++i) out.push_back(parse_double(f[i]));
    } catch (const Error&) {
        corrupt("header field '" + key + "' holds a non-numeric value");
    }
    return out;
}

}  // namespace

std::string serialize_checkpoint(const TrainedModel& model) {
    const Architecture& arch = model.arch;
    arch.validate();
    require(model.class_names.size() == arch.classes(), ErrorKind::Checkpoint,
            "checkpoint: class name count differs from model class count");
    for (const auto& name : model.class_names) {
        require(!name.empty() && name.find_first_of(" \t\r\n") == std::string::npos, ErrorKind::Checkpoint,
                "checkpoint: class names must be non-empty and contain no whitespace");
    }
    require(model.stats.means.size() == arch.channels() && model.stats.stds.size() == arch.channels(),
            ErrorKind::Checkpoint, "checkpoint: channel statistics do not match the model's channel count");
    const auto shapes = arch.layer_shapes();
    require(model.params.shapes() == shapes, ErrorKind::Checkpoint,
            "checkpoint: parameter shapes do not match the architecture");

    std::ostringstream h;
    h << kCheckpointMagic << '\n';
    h << "version " << kCheckpointVersion << '\n';
    h << "model " << to_string(arch.kind) << '\n';
    h << "classes " << model.class_names.size();
    for (const auto& n : model.class_names) h << ' ' << n;
    h << '\n';
    if (arch.kind == ModelKind::Charm) {
        const auto& c = arch.charm;
        h << "charm.window " << c.window << '\n'
          << "charm.channels " << c.channels << '\n'
          << "charm.low_hidden " << c.low_hidden << '\n'
          << "charm.low_out " << c.low_out << '\n'
          << "charm.windows " << c.windows << '\n'
          << "charm.high_hidden " << c.high_hidden << '\n'
          << "charm.classes " << c.classes << '\n'
          << "charm.dropout_p " << format_double(c.dropout_p) << '\n'
          << "charm.leaky_slope " << format_double(c.leaky_slope) << '\n'
          << "charm.low_output_activation " << (c.low_output_activation ? 1 : 0) << '\n';
    } else {
        const auto& c = arch.mlp;
        h << "mlp.layers " << c.layers << '\n'
          << "mlp.hidden " << c.hidden << '\n'
          << "mlp.sequence_length " << c.sequence_length << '\n'
          << "mlp.channels " << c.channels << '\n'
          << "mlp.classes " << c.classes << '\n'
          << "mlp.dropout_p " << format_double(c.dropout_p) << '\n'
          << "mlp.leaky_slope " << format_double(c.leaky_slope) << '\n';
    }
    h << "stats.means " << join_doubles(model.stats.means) << '\n';
    h << "stats.stds " << join_doubles(model.stats.stds) << '\n';
    h << "weights.layers " << shapes.size();
    for (const auto& s : shapes) h << ' ' << s.in << ' ' << s.out;
    h << '\n';
    h << "weights.count " << model.params.size() << '\n';
    h << "end\n";

    std::string out = std::move(h).str();
    out.reserve(out.size() + 8 * model.params.size() + 8);
    for (double v : model.params.values()) append_le(out, std::bit_cast<std::uint64_t>(v));
    append_le(out, fnv1a64(out));
    return out;
}

TrainedModel parse_checkpoint(std::string_view bytes) {
    const std::string magic_line = std::string(kCheckpointMagic) + "\n";
    if (bytes.substr(0, magic_line.size()) != magic_line) {
        fail(ErrorKind::Checkpoint, "not a checkpoint file (missing " + std::string(kCheckpointMagic) + " magic)");
    }
    std::size_t pos = magic_line.size();
    Header header;
    bool ended = false;
    while (pos < bytes.size()) {
        const std::size_t nl = bytes.find('\n', pos);
        if (nl == std::string_view::npos) break;
        const std::string line(bytes.substr(pos, nl - pos));
        pos = nl + 1;
        if (line == "end") {
            ended = true;
            break;
        }
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        std::vector<std::string> rest;
        for (std::string tok; ls >> tok;) rest.push_back(tok);
        if (key.empty()) corrupt("blank header line");
        header[key] = std::move(rest);
    }
    if (!ended) corrupt("truncated header");

    const std::size_t version = size_field(header, "version");
    if (version != static_cast<std::size_t>(kCheckpointVersion)) {
        fail(ErrorKind::Checkpoint, "unsupported checkpoint version " + std::to_string(version) + " (expected " +
                                        std::to_string(kCheckpointVersion) + ")");
    }

    TrainedModel m;
    try {
        m.arch.kind = parse_model_kind(field(header, "model")[0]);
    } catch (const Error&) {
        corrupt("unknown model kind");
    }
    const auto& classes = field(header, "classes");
    if (classes.size() != size_field(header, "classes") + 1) corrupt("class list length mismatch");
    m.class_names.assign(classes.begin() + 1, classes.end());

    if (m.arch.kind == ModelKind::Charm) {
        auto& c = m.arch.charm;
        c.window = size_field(header, "charm.window");
        c.channels = size_field(header, "charm.channels");
        c.low_hidden = size_field(header, "charm.low_hidden");
        c.low_out = size_field(header, "charm.low_out");
        c.windows = size_field(header, "charm.windows");
        c.high_hidden = size_field(header, "charm.high_hidden");
        c.classes = size_field(header, "charm.classes");
        c.dropout_p = double_field(header, "charm.dropout_p");
        c.leaky_slope = double_field(header, "charm.leaky_slope");
        c.low_output_activation = size_field(header, "charm.low_output_activation") != 0;
    } else {
        auto& c = m.arch.mlp;
        c.layers = size_field(header, "mlp.layers");
        c.hidden = size_field(header, "mlp.hidden");
        c.sequence_length = size_field(header, "mlp.sequence_length");
        c.channels = size_field(header, "mlp.channels");
        c.classes = size_field(header, "mlp.classes");
        c.dropout_p = double_field(header, "mlp.dropout_p");
        c.leaky_slope = double_field(header, "mlp.leaky_slope");
    }
    try {
        m.arch.validate();
    } catch (const Error& e) {
        corrupt(std::string("invalid configuration: ") + e.what());
    }
    if (m.class_names.size() != m.arch.classes()) corrupt("class list does not match the configured class count");

    m.stats.means = doubles_field(header, "stats.means");
    m.stats.stds = doubles_field(header, "stats.stds");
    if (m.stats.means.size() != m.arch.channels() || m.stats.stds.size() != m.arch.channels()) {
        corrupt("channel statistics do not match the configured channel count");
    }

    const auto expected = m.arch.layer_shapes();
    const auto& layers = field(header, "weights.layers");
    const std::size_t layer_count = size_field(header, "weights.layers");
    if (layers.size() != 2 * layer_count + 1) corrupt("weights.layers length mismatch");
    std::vector<LayerShape> stored;
    for (std::size_t i = 0; i < layer_count; ++i) {
        try {
            stored.push_back({std::stoull(layers[1 + 2 * i]), std::stoull(layers[2 + 2 * i])});
        } catch (const std::exception&) {
            corrupt("weights.layers holds a non-integer");
        }
    }
    if (stored != expected) {
        fail(ErrorKind::Checkpoint, "checkpoint shape mismatch: stored layer shapes do not match the configuration");
    }
    const std::size_t count = size_field(header, "weights.count");
    if (count != parameter_count(expected)) {
        fail(ErrorKind::Checkpoint, "checkpoint shape mismatch: weight count " + std::to_string(count) +
                                        " does not match the configuration's " +
                                        std::to_string(parameter_count(expected)));
    }

    const std::size_t payload = 8 * count;
    if (bytes.size() - pos != payload + 8) {
        corrupt(bytes.size() - pos < payload + 8 ? "truncated weight data" : "trailing bytes after checksum");
    }
    if (read_le(bytes.substr(pos + payload, 8)) != fnv1a64(bytes.substr(0, pos + payload))) {
        corrupt("checksum mismatch");
    }
    m.params = ParameterSet(expected);
    auto values = m.params.values();
    for (std::size_t i = 0; i < count; ++i) values[i] = std::bit_cast<double>(read_le(bytes.substr(pos + 8 * i, 8)));
    return m;
}

void save_checkpoint(const TrainedModel& model, const std::filesystem::path& path) {
    write_file_atomic(path, serialize_checkpoint(model));
}

TrainedModel load_checkpoint(const std::filesystem::path& path) {
    std::string bytes;
    try {
        bytes = read_file(path);
    } catch (const Error& e) {
        fail(ErrorKind::Checkpoint, e.what());
    }
    return parse_checkpoint(bytes);
}

}  // namespace charm
