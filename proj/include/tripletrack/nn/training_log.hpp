#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace tripletrack::nn {

struct TrainLogRow {
    std::int64_t iteration = 0;
    double loss = 0.0;
    double accuracy = 0.0;
};

using TrainLog = std::vector<TrainLogRow>;

/// `iteration,loss,accuracy` with a header row.
std::string training_log_csv(const TrainLog& log);
void write_training_log(const std::filesystem::path& path, const TrainLog& log);

/// Thrown when a training loop produces a non-finite loss.
class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace tripletrack::nn
