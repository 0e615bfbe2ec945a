#include "tripletrack/nn/training_log.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "tripletrack/io/numbers.hpp"

namespace tripletrack::nn {

std::string training_log_csv(const TrainLog& log) {
    std::ostringstream out;
    out << "iteration,loss,accuracy\n";
    for (const auto& row : log) {
        out << row.iteration << ',' << io::format_double(row.loss) << ',' << io::format_double(row.accuracy) << '\n';
    }
    return out.str();
}

void write_training_log(const std::filesystem::path& path, const TrainLog& log) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << training_log_csv(log);
}

}  // namespace tripletrack::nn
