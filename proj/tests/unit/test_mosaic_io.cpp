#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "pet/dataset.hpp"
#include "pet/mosaic.hpp"

using namespace pet;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    static int counter = 0;
    fs::path dir = fs::temp_directory_path() / ("pet_mosaic_io_" + std::to_string(::getpid()) +
                                                "_" + std::to_string(counter++));
    fs::create_directories(dir);
    return dir;
}

RawMosaicFrame make_frame(int w, int h, std::vector<uint16_t> data, int bit_depth = 16) {
    RawMosaicFrame f;
    f.width = w;
    f.height = h;
    f.bit_depth = bit_depth;
    f.data = std::move(data);
    return f;
}

}  // namespace

TEST_CASE("layout validity", "[mosaic_io]") {
    CHECK(SuperpixelLayout::standard().valid());
    SuperpixelLayout bad;
    bad.angle_at = {{{90, 45}, {135, 45}}};
    CHECK_FALSE(bad.valid());
    CHECK(SuperpixelLayout::standard().position_of(0) == std::pair<int, int>(1, 1));
    CHECK(SuperpixelLayout::standard().position_of(90) == std::pair<int, int>(0, 0));
}

TEST_CASE("raw frame round trip is byte exact", "[mosaic_io]") {
    auto dir = temp_dir();
    auto frame = make_frame(4, 2, {1, 2, 3, 4, 5, 6, 7, 8});
    write_raw_frame(frame, dir / "a.pfaraw");
    auto back = read_raw_frame(dir / "a.pfaraw");
    CHECK(back == frame);
    CHECK(back.data == std::vector<uint16_t>{1, 2, 3, 4, 5, 6, 7, 8});
}

TEST_CASE("raw frame io errors", "[mosaic_io]") {
    auto dir = temp_dir();

    SECTION("missing file") {
        try {
            read_raw_frame(dir / "nope.pfaraw");
            FAIL("expected throw");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::missing_file);
        }
    }
    SECTION("odd dimensions rejected on write") {
        auto frame = make_frame(5, 2, std::vector<uint16_t>(10, 0));
        try {
            write_raw_frame(frame, dir / "odd.pfaraw");
            FAIL("expected throw");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::odd_dimensions);
        }
    }
    SECTION("odd dimensions rejected on read") {
        auto frame = make_frame(4, 2, std::vector<uint16_t>(8, 0));
        write_raw_frame(frame, dir / "f.pfaraw");
        // corrupt the header to an odd width with matching payload size
        nlohmann::json h;
        {
            std::ifstream in(dir / "f.pfaraw.json");
            in >> h;
        }
        h["width"] = 5;
        {
            std::ofstream out(dir / "f.pfaraw.json");
            out << h.dump();
        }
        try {
            read_raw_frame(dir / "f.pfaraw");
            FAIL("expected throw");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::odd_dimensions);
        }
    }
    SECTION("bad magic") {
        auto frame = make_frame(4, 2, std::vector<uint16_t>(8, 0));
        write_raw_frame(frame, dir / "g.pfaraw");
        nlohmann::json h;
        {
            std::ifstream in(dir / "g.pfaraw.json");
            in >> h;
        }
        h["magic"] = "XXXX";
        {
            std::ofstream out(dir / "g.pfaraw.json");
            out << h.dump();
        }
        try {
            read_raw_frame(dir / "g.pfaraw");
            FAIL("expected throw");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::bad_magic);
        }
    }
    SECTION("header/payload size mismatch") {
        auto frame = make_frame(4, 2, std::vector<uint16_t>(8, 0));
        write_raw_frame(frame, dir / "h.pfaraw");
        nlohmann::json h;
        {
            std::ifstream in(dir / "h.pfaraw.json");
            in >> h;
        }
        h["width"] = 6;
        {
            std::ofstream out(dir / "h.pfaraw.json");
            out << h.dump();
        }
        try {
            read_raw_frame(dir / "h.pfaraw");
            FAIL("expected throw");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::dimension_mismatch);
        }
    }
    SECTION("sample exceeding bit depth rejected before write") {
        auto frame = make_frame(2, 2, {0, 4096, 1, 2}, 12);
        try {
            write_raw_frame(frame, dir / "r.pfaraw");
            FAIL("expected throw");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::range_error);
        }
        CHECK_FALSE(fs::exists(dir / "r.pfaraw"));
    }
    SECTION("12-bit frame accepted, header records bit depth") {
        auto frame = make_frame(2, 2, {0, 4095, 1, 2}, 12);
        write_raw_frame(frame, dir / "ok12.pfaraw");
        auto back = read_raw_frame(dir / "ok12.pfaraw");
        CHECK(back.bit_depth == 12);
        CHECK(back == frame);
    }
}

TEST_CASE("tensor round trip", "[mosaic_io]") {
    auto dir = temp_dir();
    TensorFile t;
    t.names = {"a", "b"};
    PlaneD p1(3, 2);
    PlaneD p2(3, 2);
    for (int i = 0; i < 6; ++i) {
        p1.data()[i] = 0.25 * i;
        p2.data()[i] = -1.5 + i;
    }
    t.planes = {p1, p2};
    write_tensor(t, dir / "t.pft");
    auto back = read_tensor(dir / "t.pft");
    REQUIRE(back.planes.size() == 2);
    CHECK(back.names == t.names);
    // values chosen exactly representable in float32
    CHECK(back.planes[0] == p1);
    CHECK(back.planes[1] == p2);

    try {
        read_tensor(dir / "missing.pft");
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::missing_file);
    }
}

TEST_CASE("manifest load groups records per participant", "[mosaic_io]") {
    auto dir = temp_dir();
    // create three resolvable frame files
    auto frame = make_frame(2, 2, {1, 2, 3, 4});
    for (const char* name : {"f0.pfaraw", "f1.pfaraw", "f2.pfaraw"})
        write_raw_frame(frame, dir / name);

    GazeDataset ds;
    ds.root = dir;
    for (const char* pid : {"p01", "p02"}) {
        ParticipantEntry part;
        part.participant_id = pid;
        for (int i = 0; i < 3; ++i) {
            GazeRecord rec;
            rec.frame_path = "f" + std::to_string(i) + ".pfaraw";
            rec.gaze_gt = {static_cast<double>(i), -static_cast<double>(i)};
            rec.condition_tag = "nominal";
            rec.sequence_name = "RS";
            part.records.push_back(rec);
        }
        ds.participants.push_back(part);
    }
    save_gaze_dataset(ds, dir / "manifest.json");

    auto loaded = load_gaze_dataset(dir / "manifest.json");
    REQUIRE(loaded.participants.size() == 2);
    CHECK(loaded.participants[0].participant_id == "p01");
    CHECK(loaded.participants[0].records.size() == 3);
    CHECK(loaded.participants[1].records.size() == 3);
    // order preserved
    CHECK(loaded.participants[0].records[2].gaze_gt.yaw == 2.0);
}

TEST_CASE("manifest errors", "[mosaic_io]") {
    auto dir = temp_dir();
    auto frame = make_frame(2, 2, {1, 2, 3, 4});
    write_raw_frame(frame, dir / "f.pfaraw");

    SECTION("duplicate participant id") {
        nlohmann::json j = {
            {"participants",
             {{{"participant_id", "p01"}, {"records", nlohmann::json::array()}},
              {{"participant_id", "p01"}, {"records", nlohmann::json::array()}}}}};
        std::ofstream(dir / "dup.json") << j.dump();
        try {
            load_gaze_dataset(dir / "dup.json");
            FAIL("expected throw");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::duplicate_participant);
        }
    }
    SECTION("empty records accepted") {
        nlohmann::json j = {
            {"participants", {{{"participant_id", "p01"}, {"records", nlohmann::json::array()}}}}};
        std::ofstream(dir / "empty.json") << j.dump();
        auto ds = load_gaze_dataset(dir / "empty.json");
        REQUIRE(ds.participants.size() == 1);
        CHECK(ds.participants[0].records.empty());
    }
    SECTION("unresolvable frame path") {
        nlohmann::json j = {
            {"participants",
             {{{"participant_id", "p01"},
               {"records",
                {{{"frame_path", "missing.pfaraw"}, {"gaze_gt", {0.0, 0.0}}}}}}}}};
        std::ofstream(dir / "bad.json") << j.dump();
        try {
            load_gaze_dataset(dir / "bad.json");
            FAIL("expected throw");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::unresolved_frame_path);
        }
    }
    SECTION("parse error on malformed json") {
        std::ofstream(dir / "garbage.json") << "{not json";
        try {
            load_gaze_dataset(dir / "garbage.json");
            FAIL("expected throw");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::parse_error);
        }
    }
}
