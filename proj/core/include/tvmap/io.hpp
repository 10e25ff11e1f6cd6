#pragma once

#include "tvmap/bootstrap.hpp"
#include "tvmap/lattice.hpp"
#include "tvmap/qut.hpp"
#include "tvmap/tracks.hpp"

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace tvmap::io {

// Round-trip float formatting shared by every CSV writer, so identical
// configurations give byte-identical artifacts.
std::string format_double(double v);

// Writes to <path>.tmp and renames, so partial outputs never appear.
void atomic_write(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

std::uint64_t fnv1a64(const std::string& data);
std::string hash_hex(const std::string& data);

// Everything an artifact needs to be reproduced.
struct Provenance {
    std::string command;
    std::string config_hash;
    std::uint64_t seed = 0;
};

// --- lattice spec: {"n_rows":R,"n_cols":C,"full":true} or row-major "mask" ---
LatticeSpec read_lattice_json(const std::filesystem::path& path);
void write_lattice_json(const std::filesystem::path& path, const LatticeSpec& spec);

// --- dense CSV (no header) ---
void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& M);
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);
void write_vector_csv(const std::filesystem::path& path, const Eigen::VectorXd& v);
Eigen::VectorXd read_vector_csv(const std::filesystem::path& path);

// --- maps: header row,col,value; masked cells omitted ---
void write_map_csv(const std::filesystem::path& path, const Eigen::VectorXd& map,
                   const NeighborGraph& graph);
Eigen::VectorXd read_map_csv(const std::filesystem::path& path, const NeighborGraph& graph);

// Plain-text PGM (P2) of a [0,1]-scaled map for quick visual inspection.
void write_pgm(const std::filesystem::path& path, const Eigen::VectorXd& map01,
               const NeighborGraph& graph);

// --- dataset bundle: X.csv, y.csv, lattice.json, dataset.json sidecar ---
void write_dataset(const std::filesystem::path& dir, const Dataset& dataset,
                   const Provenance& provenance);
Dataset read_dataset(const std::filesystem::path& dir);

// --- field data ---
// tracks CSV header: animal_id,timestamp,x,y (ISO-8601 UTC timestamps)
std::vector<TrackPoint> read_tracks_csv(const std::filesystem::path& path);
// serology CSV header: animal_id,serotype,titer_start,titer_end,baseline_positive
std::vector<SerologyRecord> read_serology_csv(const std::filesystem::path& path,
                                              const std::string& serotype_filter = "");

std::int64_t parse_iso8601(const std::string& text);
std::string format_iso8601(std::int64_t seconds_utc);

// --- reports ---
void write_test_report_json(const std::filesystem::path& path, const TestReport& report,
                            const Provenance& provenance);
void write_qut_json(const std::filesystem::path& path, const QutResult& qut,
                    const Provenance& provenance);
void write_bootstrap_csv(const std::filesystem::path& path, const BootstrapResult& result);

} // namespace tvmap::io
