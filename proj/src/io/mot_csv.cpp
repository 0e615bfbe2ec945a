#include "tripletrack/io/mot_csv.hpp"

#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "tripletrack/io/numbers.hpp"

namespace tripletrack::io {

void ImageSize::validate() const {
    if (!(width > 0.0 && height > 0.0)) throw std::invalid_argument("image size must be positive");
}

namespace {

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

template <typename Fn>
void for_each_line(const std::string& text, const std::string& source, Fn&& fn) {
    std::size_t start = 0;
    int line_no = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        std::string_view line(text.data() + start, end - start);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!line.empty()) {
            try {
                fn(line);
            } catch (const std::exception& e) {
                throw std::runtime_error(source + ":" + std::to_string(line_no) + ": " + e.what());
            }
        }
        start = end + 1;
    }
}

int to_int(std::string_view s) {
    const long long v = parse_int(s);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
        throw std::invalid_argument("integer out of range: " + std::string(s));
    }
    return static_cast<int>(v);
}

}  // namespace

std::string write_mot_csv(std::span<const MotRow> rows) {
    std::string out;
    for (const auto& r : rows) {
        out += std::to_string(r.frame);
        out += ',';
        out += std::to_string(r.id);
        for (double v : {r.left, r.top, r.width, r.height, r.confidence, r.x, r.y, r.z}) {
            out += ',';
            out += format_double(v);
        }
        out += '\n';
    }
    return out;
}

std::vector<MotRow> parse_mot_csv(const std::string& text, const std::string& source) {
    std::vector<MotRow> rows;
    for_each_line(text, source, [&](std::string_view line) {
        const auto f = split(line);
        if (f.size() != 10 && f.size() != 9) {
            throw std::invalid_argument("expected 10 MOT columns, found " + std::to_string(f.size()));
        }
        MotRow r;
        r.frame = to_int(f[0]);
        r.id = to_int(f[1]);
        r.left = parse_double(f[2]);
        r.top = parse_double(f[3]);
        r.width = parse_double(f[4]);
        r.height = parse_double(f[5]);
        r.confidence = parse_double(f[6]);
        r.x = parse_double(f[7]);
        r.y = parse_double(f[8]);
        r.z = f.size() == 10 ? parse_double(f[9]) : -1.0;
        rows.push_back(r);
    });
    return rows;
}

std::string write_descriptor_csv(std::span<const sim::Detection> detections) {
    std::string out;
    int frame = 0, index = 0;
    for (const auto& d : detections) {
        index = d.frame == frame ? index + 1 : 0;
        frame = d.frame;
        out += std::to_string(d.frame);
        out += ',';
        out += std::to_string(index);
        for (double v : d.descriptor) {
            out += ',';
            out += format_double(v);
        }
        out += '\n';
    }
    return out;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string() + " for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text, bool force) {
    if (!force && std::filesystem::exists(path)) {
        throw std::runtime_error(path.string() + " already exists; pass --force to overwrite");
    }
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

MotRow to_mot_row(int frame, int id, sim::Position center, sim::BoxSize box, double confidence,
                  const ImageSize& image) {
    MotRow r;
    r.frame = frame;
    r.id = id;
    r.width = box.w * image.width;
    r.height = box.h * image.height;
    r.left = (center.x + 0.5) * image.width - 0.5 * r.width;
    r.top = (center.y + 0.5) * image.height - 0.5 * r.height;
    r.confidence = confidence;
    return r;
}

sim::Position row_center(const MotRow& row, const ImageSize& image) {
    return {(row.left + 0.5 * row.width) / image.width - 0.5, (row.top + 0.5 * row.height) / image.height - 0.5};
}

sim::BoxSize row_size(const MotRow& row, const ImageSize& image) {
    return {row.width / image.width, row.height / image.height};
}

std::vector<MotRow> ground_truth_rows(const sim::Scene& scene, const ImageSize& image) {
    std::vector<MotRow> rows;
    for (int frame = 1; frame <= scene.config.frames; ++frame) {
        for (std::size_t i = 0; i < scene.trajectories.size(); ++i) {
            const auto& t = scene.trajectories[i];
            if (!t.covers(frame)) continue;
            if (!scene.visible[i][static_cast<std::size_t>(frame - t.start_frame)]) continue;
            rows.push_back(to_mot_row(frame, t.identity + 1, t.at(frame), t.box, 1.0, image));
        }
    }
    return rows;
}

std::vector<MotRow> detection_rows(std::span<const sim::Detection> detections, const ImageSize& image) {
    std::vector<MotRow> rows;
    rows.reserve(detections.size());
    for (const auto& d : detections) rows.push_back(to_mot_row(d.frame, -1, d.position, d.box, d.confidence, image));
    return rows;
}

std::vector<MotRow> track_rows(std::span<const assoc::TrackRow> rows, const ImageSize& image) {
    std::vector<MotRow> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(to_mot_row(r.frame, r.id, r.position, r.box, r.confidence, image));
    return out;
}

std::vector<sim::Detection> detections_from_rows(std::span<const MotRow> rows, const std::string& descriptor_csv,
                                                 const ImageSize& image, const std::string& source) {
    std::map<std::pair<int, int>, std::vector<double>> descriptors;
    for_each_line(descriptor_csv, source, [&](std::string_view line) {
        const auto f = split(line);
        if (f.size() < 3) throw std::invalid_argument("descriptor row needs frame, det_index and values");
        std::vector<double> d;
        for (std::size_t k = 2; k < f.size(); ++k) d.push_back(parse_double(f[k]));
        if (!descriptors.emplace(std::pair{to_int(f[0]), to_int(f[1])}, std::move(d)).second) {
            throw std::invalid_argument("duplicate descriptor row");
        }
    });
    std::vector<sim::Detection> out;
    out.reserve(rows.size());
    int frame = 0, index = 0;
    for (const auto& r : rows) {
        index = r.frame == frame ? index + 1 : 0;
        frame = r.frame;
        auto it = descriptors.find({r.frame, index});
        if (it == descriptors.end()) {
            throw std::runtime_error(source + ": no descriptor for frame " + std::to_string(r.frame) + " detection " +
                                     std::to_string(index));
        }
        sim::Detection d;
        d.frame = r.frame;
        d.position = row_center(r, image);
        d.box = row_size(r, image);
        d.confidence = r.confidence;
        d.descriptor = it->second;
        out.push_back(std::move(d));
    }
    if (out.size() != descriptors.size()) {
        throw std::runtime_error(source + ": " + std::to_string(descriptors.size()) + " descriptor rows for " +
                                 std::to_string(out.size()) + " detections");
    }
    return out;
}

std::vector<eval::BoxRow> box_rows(std::span<const MotRow> rows) {
    std::vector<eval::BoxRow> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back({r.frame, r.id, {r.left, r.top, r.width, r.height}});
    return out;
}

}  // namespace tripletrack::io
