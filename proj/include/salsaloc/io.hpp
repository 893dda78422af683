#pragma once

// Text formats. Lines starting with '#' are comments and are skipped on
// read. Angles are degrees; Cartesian columns are dimensionless.
//
//   metadata     frame,class,track,azimuth,elevation          (no header)
//   derivative   frame,class,track,azimuth,elevation,dx,dy,dz (no header)
//   prediction   frame,class,x,y,z,dx,dy,dz                   (header row)
//   trajectory   frame,class,raw_x,raw_y,raw_z,fused_x,fused_y,fused_z,
//                truth_x,truth_y,truth_z,raw_error,fused_error,derivative_norm

#include "salsaloc/fusion.hpp"
#include "salsaloc/labels.hpp"
#include "salsaloc/metrics.hpp"
#include "salsaloc/predictor.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace salsaloc {

inline constexpr const char* kPredictionHeader = "frame,class,x,y,z,dx,dy,dz";
inline constexpr const char* kTrajectoryHeader =
    "frame,class,raw_x,raw_y,raw_z,fused_x,fused_y,fused_z,truth_x,truth_y,truth_z,"
    "raw_error,fused_error,derivative_norm";

/// Splits on commas and trims blanks around each field.
std::vector<std::string> split_csv_line(const std::string& line);

/// Reads a metadata CSV. Frame, class and track must be integers; angles may
/// carry decimals. frame_count / class_count are one past the largest values
/// seen. Throws DataError naming the line for malformed rows, angles outside
/// [-180, 180) x [-90, 90], or duplicate (frame, class, track) rows.
TrajectorySet ingest_metadata(const std::filesystem::path& path);
TrajectorySet parse_metadata(const std::string& text, const std::string& source = "<text>");

std::string format_metadata(const TrajectorySet& set, const std::vector<std::string>& comments = {});
std::string format_derivatives(const TrajectorySet& truth, const DerivativeLabels& derivatives,
                               const std::vector<std::string>& comments = {});
std::pair<TrajectorySet, DerivativeLabels> parse_derivatives(const std::string& text,
                                                             const std::string& source = "<text>");

std::string format_predictions(const PredictorOutput& preds, const std::vector<std::string>& comments = {});
PredictorOutput parse_predictions(const std::string& text, const std::string& source = "<text>");

std::string format_trajectory_report(const std::vector<FusionRow>& rows,
                                     const std::vector<std::string>& comments = {});

/// One row per source plus per-split and per-class summary rows.
std::string format_report_csv(const EvalReport& report, const std::vector<std::string>& comments = {});

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace salsaloc
