#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tripletrack/assoc/tracker.hpp"
#include "tripletrack/eval/clear_mot.hpp"
#include "tripletrack/sim/simulator.hpp"

namespace tripletrack::io {

/// Pixel frame used when exchanging normalized positions as MOT rows.
struct ImageSize {
    double width = 1920.0;
    double height = 1080.0;

    void validate() const;
};

/// `frame,id,bb_left,bb_top,bb_width,bb_height,conf,x,y,z` in pixel units.
struct MotRow {
    int frame = 0;
    int id = -1;
    double left = 0.0;
    double top = 0.0;
    double width = 0.0;
    double height = 0.0;
    double confidence = 1.0;
    double x = -1.0;
    double y = -1.0;
    double z = -1.0;

    friend bool operator==(const MotRow&, const MotRow&) = default;
};

/// No header, LF endings, shortest round-trip numbers, so write(read(write(x))) == write(x).
std::string write_mot_csv(std::span<const MotRow> rows);
/// Throws std::runtime_error naming `source` and the line for malformed rows.
std::vector<MotRow> parse_mot_csv(const std::string& text, const std::string& source = "<memory>");

/// Sidecar rows `frame,det_index,d0..d{D-1}`; det_index counts detections within a frame in file order.
std::string write_descriptor_csv(std::span<const sim::Detection> detections);

/// Whole-file helpers. write_text refuses to replace an existing file unless `force`.
std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text, bool force);

MotRow to_mot_row(int frame, int id, sim::Position center, sim::BoxSize box, double confidence,
                  const ImageSize& image);
sim::Position row_center(const MotRow& row, const ImageSize& image);
sim::BoxSize row_size(const MotRow& row, const ImageSize& image);

/// One row per visible ground-truth frame; ids are identity + 1.
std::vector<MotRow> ground_truth_rows(const sim::Scene& scene, const ImageSize& image);
/// Detection rows carry id -1.
std::vector<MotRow> detection_rows(std::span<const sim::Detection> detections, const ImageSize& image);
std::vector<MotRow> track_rows(std::span<const assoc::TrackRow> rows, const ImageSize& image);

/// Rebuilds detections from MOT rows and the descriptor sidecar text. Ground-truth ids are not
/// recoverable and stay empty.
std::vector<sim::Detection> detections_from_rows(std::span<const MotRow> rows, const std::string& descriptor_csv,
                                                 const ImageSize& image, const std::string& source = "<memory>");

/// Boxes in pixel units for evaluation.
std::vector<eval::BoxRow> box_rows(std::span<const MotRow> rows);

}  // namespace tripletrack::io
