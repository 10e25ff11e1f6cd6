#include <doctest.h>

#include "tvmap/errors.hpp"
#include "tvmap/io.hpp"
#include "tvmap/lattice.hpp"

#include <cstdio>
#include <filesystem>

using namespace tvmap;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("tvmap_test_" + std::to_string(std::rand()) + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

} // namespace

TEST_CASE("matrix and vector CSV round-trip bit-exactly") {
    TempDir tmp;
    Eigen::MatrixXd M(2, 3);
    M << 1.0, -2.5, 3.14159265358979312, 1e-17, 2880.0, 0.1;
    io::write_matrix_csv(tmp.path / "m.csv", M);
    const Eigen::MatrixXd back = io::read_matrix_csv(tmp.path / "m.csv");
    CHECK(back == M);

    Eigen::VectorXd v(4);
    v << 1, 0, 1, 1;
    io::write_vector_csv(tmp.path / "v.csv", v);
    CHECK(io::read_vector_csv(tmp.path / "v.csv") == v);
}

TEST_CASE("lattice JSON: full grids and masks") {
    TempDir tmp;
    LatticeSpec spec = LatticeSpec::full(3, 4);
    io::write_lattice_json(tmp.path / "full.json", spec);
    const LatticeSpec full_back = io::read_lattice_json(tmp.path / "full.json");
    CHECK(full_back.n_rows == 3);
    CHECK(full_back.n_cols == 4);
    CHECK(full_back.mask == spec.mask);
    CHECK(io::read_text(tmp.path / "full.json").find("full") != std::string::npos);

    spec.mask[5] = 0;
    io::write_lattice_json(tmp.path / "mask.json", spec);
    CHECK(io::read_lattice_json(tmp.path / "mask.json").mask == spec.mask);
}

TEST_CASE("map CSV omits masked cells and round-trips") {
    TempDir tmp;
    LatticeSpec spec = LatticeSpec::full(2, 3);
    spec.mask[4] = 0;
    const NeighborGraph graph = build_neighbor_graph(spec);
    Eigen::VectorXd map(graph.p());
    for (int l = 0; l < graph.p(); ++l) map[l] = 0.5 * l - 1.0;
    io::write_map_csv(tmp.path / "map.csv", map, graph);

    const std::string text = io::read_text(tmp.path / "map.csv");
    CHECK(text.rfind("row,col,value\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 1 + graph.p());

    CHECK(io::read_map_csv(tmp.path / "map.csv", graph) == map);
}

TEST_CASE("dataset bundle round-trip") {
    TempDir tmp;
    Dataset ds;
    ds.lattice = LatticeSpec::full(2, 2);
    ds.X.resize(2, 4);
    ds.X << 1, 2, 0, 1, 0, 1, 3, 0;
    ds.y.resize(2);
    ds.y << 1, 0;
    ds.animal_ids = {"a", "b"};
    ds.step_units = 96.0;
    io::write_dataset(tmp.path / "ds", ds, {"unit-test", "cafe", 7});

    const Dataset back = io::read_dataset(tmp.path / "ds");
    CHECK(back.X == ds.X);
    CHECK(back.y == ds.y);
    CHECK(back.step_units == 96.0);
    CHECK(back.animal_ids == ds.animal_ids);
}

TEST_CASE("ISO-8601 parsing and formatting") {
    CHECK(io::parse_iso8601("1970-01-01T00:00:00Z") == 0);
    CHECK(io::parse_iso8601("2015-05-27T00:00:00Z") == 1432684800);
    CHECK(io::parse_iso8601("2015-05-27 01:00:00") == 1432684800 + 3600);
    CHECK(io::parse_iso8601("2015-05-27T00:00:00+01:00") == 1432684800 - 3600);
    CHECK(io::parse_iso8601("2015-05-27T00:00:30.5Z") == 1432684830);
    CHECK(io::format_iso8601(1432684800) == "2015-05-27T00:00:00Z");
    CHECK_THROWS_AS(io::parse_iso8601("not-a-date"), data_error);
    CHECK_THROWS_AS(io::parse_iso8601("2015-13-27T00:00:00Z"), data_error);
}

TEST_CASE("tracks and serology CSV parsing") {
    TempDir tmp;
    io::atomic_write(tmp.path / "tracks.csv",
                     "animal_id,timestamp,x,y\n"
                     "d1,2015-05-27T00:00:00Z,100.5,200.25\n"
                     "d1,2015-05-27T00:15:00Z,101.5,201.25\n");
    const auto points = io::read_tracks_csv(tmp.path / "tracks.csv");
    REQUIRE(points.size() == 2);
    CHECK(points[0].animal_id == "d1");
    CHECK(points[1].timestamp - points[0].timestamp == 900);
    CHECK(points[1].x == 101.5);

    io::atomic_write(tmp.path / "sero.csv",
                     "animal_id,serotype,titer_start,titer_end,baseline_positive\n"
                     "d1,EHDV-1,0,8,false\n"
                     "d1,EHDV-2,0,,false\n"
                     "d2,EHDV-1,2,2,1\n");
    const auto all = io::read_serology_csv(tmp.path / "sero.csv");
    CHECK(all.size() == 3);
    CHECK(std::isnan(all[1].titer_end));
    CHECK(all[2].baseline_positive);
    const auto ehdv1 = io::read_serology_csv(tmp.path / "sero.csv", "EHDV-1");
    CHECK(ehdv1.size() == 2);

    io::atomic_write(tmp.path / "bad.csv", "animal,ts\nx,y\n");
    CHECK_THROWS_AS(io::read_tracks_csv(tmp.path / "bad.csv"), data_error);
}

TEST_CASE("PGM rendering") {
    TempDir tmp;
    const NeighborGraph graph = build_neighbor_graph(LatticeSpec::full(2, 2));
    Eigen::VectorXd map(4);
    map << 0.0, 1.0, 0.5, 0.25;
    io::write_pgm(tmp.path / "map.pgm", map, graph);
    const std::string text = io::read_text(tmp.path / "map.pgm");
    CHECK(text.rfind("P2\n2 2\n255\n", 0) == 0);
    CHECK(text.find("255") != std::string::npos);
}

TEST_CASE("atomic writes leave no temporary behind") {
    TempDir tmp;
    io::atomic_write(tmp.path / "out.txt", "payload");
    CHECK(io::read_text(tmp.path / "out.txt") == "payload");
    CHECK(!fs::exists(tmp.path / "out.txt.tmp"));
}

TEST_CASE("hashing is stable") {
    CHECK(io::hash_hex("") == io::hash_hex(""));
    CHECK(io::hash_hex("a") != io::hash_hex("b"));
    CHECK(io::hash_hex("config").size() == 16);
}
