#include "tvmap/io.hpp"

#include "tvmap/errors.hpp"
#include "tvmap/version.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace tvmap::io {

using nlohmann::json;

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw data_error("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw data_error("failed while writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hash_hex(const std::string& data) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(data)));
    return buf;
}

LatticeSpec read_lattice_json(const std::filesystem::path& path) {
    json j = json::parse(read_text(path));
    LatticeSpec spec;
    spec.n_rows = j.at("n_rows").get<int>();
    spec.n_cols = j.at("n_cols").get<int>();
    if (spec.n_rows <= 0 || spec.n_cols <= 0)
        throw data_error(path.string() + ": grid dimensions must be positive");
    if (j.value("full", false)) {
        spec.mask.assign(static_cast<std::size_t>(spec.n_rows) * spec.n_cols, 1);
    } else {
        const auto& mask = j.at("mask");
        if (mask.size() != static_cast<std::size_t>(spec.n_rows) * spec.n_cols)
            throw data_error(path.string() + ": mask length does not match grid");
        spec.mask.reserve(mask.size());
        for (const auto& v : mask) spec.mask.push_back(v.get<int>() != 0 ? 1 : 0);
    }
    return spec;
}

void write_lattice_json(const std::filesystem::path& path, const LatticeSpec& spec) {
    json j;
    j["n_rows"] = spec.n_rows;
    j["n_cols"] = spec.n_cols;
    bool full = true;
    for (auto m : spec.mask) full = full && (m != 0);
    if (full) {
        j["full"] = true;
    } else {
        std::vector<int> mask(spec.mask.begin(), spec.mask.end());
        j["mask"] = mask;
    }
    atomic_write(path, j.dump(2) + "\n");
}

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& M) {
    std::string out;
    out.reserve(static_cast<std::size_t>(M.size()) * 8);
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        for (Eigen::Index jcol = 0; jcol < M.cols(); ++jcol) {
            if (jcol) out += ',';
            out += format_double(M(i, jcol));
        }
        out += '\n';
    }
    atomic_write(path, out);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    fields.push_back(field);
    return fields;
}

double parse_double(const std::string& s, const std::string& where) {
    if (s == "nan" || s == "NaN" || s.empty())
        return std::numeric_limits<double>::quiet_NaN();
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw data_error(where + ": cannot parse number '" + s + "'");
    }
}

} // namespace

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto& f : fields) row.push_back(parse_double(f, path.string()));
        if (!rows.empty() && rows.front().size() != row.size())
            throw data_error(path.string() + ": ragged rows");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw data_error(path.string() + ": empty matrix");
    Eigen::MatrixXd M(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t jcol = 0; jcol < rows[i].size(); ++jcol)
            M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(jcol)) = rows[i][jcol];
    return M;
}

void write_vector_csv(const std::filesystem::path& path, const Eigen::VectorXd& v) {
    std::string out;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out += format_double(v[i]);
        out += '\n';
    }
    atomic_write(path, out);
}

Eigen::VectorXd read_vector_csv(const std::filesystem::path& path) {
    const Eigen::MatrixXd M = read_matrix_csv(path);
    if (M.cols() != 1) throw data_error(path.string() + ": expected a single column");
    return M.col(0);
}

void write_map_csv(const std::filesystem::path& path, const Eigen::VectorXd& map,
                   const NeighborGraph& graph) {
    if (map.size() != graph.p()) throw data_error("write_map_csv: map length mismatch");
    std::string out = "row,col,value\n";
    for (int l = 0; l < graph.p(); ++l) {
        const auto [r, c] = graph.cells[static_cast<std::size_t>(l)];
        out += std::to_string(r);
        out += ',';
        out += std::to_string(c);
        out += ',';
        out += format_double(map[l]);
        out += '\n';
    }
    atomic_write(path, out);
}

Eigen::VectorXd read_map_csv(const std::filesystem::path& path, const NeighborGraph& graph) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || split_csv_line(line) != std::vector<std::string>{"row", "col", "value"})
        throw data_error(path.string() + ": expected header row,col,value");
    Eigen::VectorXd map =
        Eigen::VectorXd::Constant(graph.p(), std::numeric_limits<double>::quiet_NaN());
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 3) throw data_error(path.string() + ": bad map row '" + line + "'");
        const int r = static_cast<int>(parse_double(fields[0], path.string()));
        const int c = static_cast<int>(parse_double(fields[1], path.string()));
        if (r < 0 || r >= graph.n_rows || c < 0 || c >= graph.n_cols)
            throw data_error(path.string() + ": cell out of range in '" + line + "'");
        const int id = graph.cell_id[static_cast<std::size_t>(r) * graph.n_cols + c];
        if (id < 0) throw data_error(path.string() + ": masked cell in '" + line + "'");
        map[id] = parse_double(fields[2], path.string());
    }
    return map;
}

void write_pgm(const std::filesystem::path& path, const Eigen::VectorXd& map01,
               const NeighborGraph& graph) {
    std::string out = "P2\n" + std::to_string(graph.n_cols) + " " +
                      std::to_string(graph.n_rows) + "\n255\n";
    for (int r = 0; r < graph.n_rows; ++r) {
        for (int c = 0; c < graph.n_cols; ++c) {
            if (c) out += ' ';
            const int id = graph.cell_id[static_cast<std::size_t>(r) * graph.n_cols + c];
            int gray = 0;
            if (id >= 0 && !std::isnan(map01[id])) {
                const double v = std::clamp(map01[id], 0.0, 1.0);
                gray = static_cast<int>(std::lround(v * 255.0));
            }
            out += std::to_string(gray);
        }
        out += '\n';
    }
    atomic_write(path, out);
}

void write_dataset(const std::filesystem::path& dir, const Dataset& dataset,
                   const Provenance& provenance) {
    std::filesystem::create_directories(dir);
    write_matrix_csv(dir / "X.csv", dataset.X);
    write_vector_csv(dir / "y.csv", dataset.y);
    write_lattice_json(dir / "lattice.json", dataset.lattice);

    json j;
    j["n"] = dataset.X.rows();
    j["p"] = dataset.X.cols();
    j["step_units"] = dataset.step_units;
    j["animal_ids"] = dataset.animal_ids;
    j["provenance"] = {{"command", provenance.command},
                       {"config_hash", provenance.config_hash},
                       {"seed", provenance.seed},
                       {"version", tvmap::version}};
    atomic_write(dir / "dataset.json", j.dump(2) + "\n");
}

Dataset read_dataset(const std::filesystem::path& dir) {
    Dataset ds;
    ds.X = read_matrix_csv(dir / "X.csv");
    ds.y = read_vector_csv(dir / "y.csv");
    ds.lattice = read_lattice_json(dir / "lattice.json");
    if (std::filesystem::exists(dir / "dataset.json")) {
        json j = json::parse(read_text(dir / "dataset.json"));
        ds.step_units = j.value("step_units", 1.0);
        if (j.contains("animal_ids"))
            ds.animal_ids = j["animal_ids"].get<std::vector<std::string>>();
    }
    if (ds.animal_ids.empty())
        for (Eigen::Index i = 0; i < ds.X.rows(); ++i)
            ds.animal_ids.push_back("row" + std::to_string(i));
    if (ds.X.rows() != ds.y.size())
        throw data_error(dir.string() + ": X rows and y length differ");
    return ds;
}

namespace {

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

// Days since 1970-01-01 (Howard Hinnant's civil-date algorithm).
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (static_cast<unsigned>(m) + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yy + (m <= 2));
}

} // namespace

std::int64_t parse_iso8601(const std::string& text) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    int consumed = 0;
    if (std::sscanf(text.c_str(), "%d-%d-%d%*1[T ]%d:%d:%d%n", &y, &mo, &d, &h, &mi, &s,
                    &consumed) != 6)
        throw data_error("cannot parse timestamp '" + text + "' (expected ISO-8601)");
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 || mi > 59 ||
        s < 0 || s > 60)
        throw data_error("timestamp out of range: '" + text + "'");
    std::size_t pos = static_cast<std::size_t>(consumed);
    // fractional seconds are truncated
    if (pos < text.size() && text[pos] == '.') {
        ++pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    }
    std::int64_t offset = 0;
    if (pos < text.size()) {
        if (text[pos] == 'Z') {
            ++pos;
        } else if (text[pos] == '+' || text[pos] == '-') {
            int oh = 0, om = 0;
            if (std::sscanf(text.c_str() + pos + 1, "%2d:%2d", &oh, &om) != 2 &&
                std::sscanf(text.c_str() + pos + 1, "%2d%2d", &oh, &om) != 2)
                throw data_error("bad timezone offset in '" + text + "'");
            offset = (text[pos] == '+' ? 1 : -1) * (oh * 3600 + om * 60);
            pos = text.size();
        }
    }
    if (pos != text.size())
        throw data_error("trailing characters in timestamp '" + text + "'");
    (void)is_leap;
    return days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + s - offset;
}

std::string format_iso8601(std::int64_t seconds_utc) {
    std::int64_t days = seconds_utc / 86400;
    std::int64_t rem = seconds_utc % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    int y, m, d;
    civil_from_days(days, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ", y, m, d,
                  static_cast<int>(rem / 3600), static_cast<int>((rem % 3600) / 60),
                  static_cast<int>(rem % 60));
    return buf;
}

std::vector<TrackPoint> read_tracks_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) ||
        split_csv_line(line) != std::vector<std::string>{"animal_id", "timestamp", "x", "y"})
        throw data_error(path.string() + ": expected header animal_id,timestamp,x,y");
    std::vector<TrackPoint> points;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 4)
            throw data_error(path.string() + ": bad track row '" + line + "'");
        TrackPoint pt;
        pt.animal_id = fields[0];
        pt.timestamp = parse_iso8601(fields[1]);
        pt.x = parse_double(fields[2], path.string());
        pt.y = parse_double(fields[3], path.string());
        points.push_back(std::move(pt));
    }
    return points;
}

std::vector<SerologyRecord> read_serology_csv(const std::filesystem::path& path,
                                              const std::string& serotype_filter) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) ||
        split_csv_line(line) != std::vector<std::string>{"animal_id", "serotype", "titer_start",
                                                         "titer_end", "baseline_positive"})
        throw data_error(path.string() +
                         ": expected header animal_id,serotype,titer_start,titer_end,"
                         "baseline_positive");
    std::vector<SerologyRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 5)
            throw data_error(path.string() + ": bad serology row '" + line + "'");
        SerologyRecord rec;
        rec.animal_id = fields[0];
        rec.serotype = fields[1];
        if (rec.serotype != "EHDV-1" && rec.serotype != "EHDV-2" && rec.serotype != "EHDV-6")
            throw data_error(path.string() + ": unknown serotype '" + rec.serotype + "'");
        rec.titer_start = parse_double(fields[2], path.string());
        rec.titer_end = parse_double(fields[3], path.string());
        if (fields[4] == "true" || fields[4] == "1") rec.baseline_positive = true;
        else if (fields[4] == "false" || fields[4] == "0") rec.baseline_positive = false;
        else throw data_error(path.string() + ": bad baseline_positive '" + fields[4] + "'");
        if (!serotype_filter.empty() && rec.serotype != serotype_filter) continue;
        records.push_back(std::move(rec));
    }
    return records;
}

void write_test_report_json(const std::filesystem::path& path, const TestReport& report,
                            const Provenance& provenance) {
    json j;
    j["statistic"] = report.statistic;
    j["threshold"] = report.threshold;
    j["reject"] = report.reject;
    j["method"] = test_method_name(report.method);
    j["alpha"] = report.alpha;
    j["m"] = report.m;
    j["seed"] = report.seed;
    j["discards"] = report.discards;
    if (report.method != TestMethod::TV) j["separated"] = report.separated;
    j["provenance"] = {{"command", provenance.command},
                       {"config_hash", provenance.config_hash},
                       {"seed", provenance.seed},
                       {"version", tvmap::version}};
    atomic_write(path, j.dump(2) + "\n");
}

void write_qut_json(const std::filesystem::path& path, const QutResult& qut,
                    const Provenance& provenance) {
    json j;
    j["lambda_qut"] = qut.lambda_qut;
    j["alpha"] = qut.alpha;
    j["m"] = qut.m;
    j["seed"] = qut.seed;
    j["discards"] = qut.discards;
    j["beta0"] = qut.beta0;
    j["samples"] = qut.samples;
    j["provenance"] = {{"command", provenance.command},
                       {"config_hash", provenance.config_hash},
                       {"seed", provenance.seed},
                       {"version", tvmap::version}};
    atomic_write(path, j.dump(2) + "\n");
}

void write_bootstrap_csv(const std::filesystem::path& path, const BootstrapResult& result) {
    std::string out = "cell,lower,estimate_bc,upper\n";
    for (Eigen::Index l = 0; l < result.mu_bc.size(); ++l) {
        out += std::to_string(l);
        out += ',';
        out += format_double(result.lower[l]);
        out += ',';
        out += format_double(result.mu_bc[l]);
        out += ',';
        out += format_double(result.upper[l]);
        out += '\n';
    }
    atomic_write(path, out);
}

} // namespace tvmap::io
