#include "tripletrack/nn/checkpoint.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "tripletrack/io/numbers.hpp"

namespace tripletrack::nn {

namespace {

constexpr const char* kMagic = "tripletrack-checkpoint";

}  // namespace

void Checkpoint::put(const std::string& name, const Tensor& tensor) {
    if (name.empty() || name.find_first_of(" \t\n") != std::string::npos) {
        throw std::invalid_argument("checkpoint: invalid tensor name '" + name + "'");
    }
    for (auto& [n, t] : tensors_) {
        if (n == name) {
            t = tensor;
            return;
        }
    }
    tensors_.emplace_back(name, tensor);
}

void Checkpoint::put_params(const ParamRefs& params) {
    for (const auto* p : params) put(p->name, p->value);
}

bool Checkpoint::has(const std::string& name) const {
    for (const auto& [n, t] : tensors_) {
        if (n == name) return true;
    }
    return false;
}

const Tensor& Checkpoint::get(const std::string& name) const {
    for (const auto& [n, t] : tensors_) {
        if (n == name) return t;
    }
    throw std::out_of_range("checkpoint: no tensor named '" + name + "'");
}

const std::string& Checkpoint::meta_value(const std::string& key) const {
    auto it = meta.find(key);
    if (it == meta.end()) throw std::out_of_range("checkpoint: missing metadata '" + key + "'");
    return it->second;
}

void Checkpoint::load_params(const ParamRefs& params) const {
    for (auto* p : params) {
        const Tensor& t = get(p->name);
        if (t.shape() != p->value.shape()) {
            throw DimensionError("checkpoint: " + p->name + " stored as " + shape_string(t.shape()) +
                                 " but model expects " + shape_string(p->value.shape()));
        }
        p->value = t;
        p->grad.fill(0.0);
        p->mean_square.fill(0.0);
    }
}

std::string Checkpoint::serialize() const {
    std::ostringstream out;
    out << kMagic << ' ' << kFormatVersion << '\n';
    out << "kind " << (kind.empty() ? "-" : kind) << '\n';
    for (const auto& [k, v] : meta) out << "meta " << k << ' ' << v << '\n';
    for (const auto& [name, t] : tensors_) {
        out << "tensor " << name << ' ' << t.rank();
        for (auto d : t.shape()) out << ' ' << d;
        out << '\n';
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (i) out << ' ';
            out << io::format_double(t[i]);
        }
        out << '\n';
    }
    out << "end\n";
    return out.str();
}

Checkpoint Checkpoint::parse(const std::string& text) {
    std::istringstream in(text);
    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != kMagic) throw std::runtime_error("checkpoint: bad header");
    if (version != kFormatVersion) {
        throw std::runtime_error("checkpoint: unsupported format version " + std::to_string(version));
    }
    Checkpoint ck;
    std::string tag;
    while (in >> tag) {
        if (tag == "end") return ck;
        if (tag == "kind") {
            in >> ck.kind;
            if (ck.kind == "-") ck.kind.clear();
        } else if (tag == "meta") {
            std::string key, value;
            in >> key;
            std::getline(in >> std::ws, value);
            ck.meta[key] = value;
        } else if (tag == "tensor") {
            std::string name;
            std::size_t rank = 0;
            in >> name >> rank;
            Shape shape(rank);
            for (auto& d : shape) in >> d;
            if (!in) throw std::runtime_error("checkpoint: malformed tensor header for " + name);
            Tensor t(shape);
            std::string field;
            for (std::size_t i = 0; i < t.size(); ++i) {
                if (!(in >> field)) throw std::runtime_error("checkpoint: truncated tensor " + name);
                t[i] = io::parse_double(field);
            }
            ck.put(name, t);
        } else {
            throw std::runtime_error("checkpoint: unexpected token '" + tag + "'");
        }
    }
    throw std::runtime_error("checkpoint: missing end marker");
}

void Checkpoint::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << serialize();
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse(buf.str());
    } catch (const std::exception& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

}  // namespace tripletrack::nn
