#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tripletrack/nn/param.hpp"

namespace tripletrack::nn {

/// Versioned text container of named tensors plus string metadata.
/// Values are written in shortest round-trip form, so load(save(x)) is bitwise exact.
class Checkpoint {
public:
    static constexpr int kFormatVersion = 1;

    std::string kind;
    std::map<std::string, std::string> meta;

    void put(const std::string& name, const Tensor& tensor);
    void put_params(const ParamRefs& params);
    const Tensor& get(const std::string& name) const;
    bool has(const std::string& name) const;

    /// Copies stored values into `params`, matching by name; shape mismatches and
    /// missing names raise. Gradients and optimizer state are reset.
    void load_params(const ParamRefs& params) const;

    const std::string& meta_value(const std::string& key) const;

    std::string serialize() const;
    static Checkpoint parse(const std::string& text);

    void save(const std::filesystem::path& path) const;
    static Checkpoint load(const std::filesystem::path& path);

private:
    std::vector<std::pair<std::string, Tensor>> tensors_;
};

}  // namespace tripletrack::nn
