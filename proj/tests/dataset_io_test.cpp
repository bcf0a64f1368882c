#include "gantrylab/dataset_io.hpp"

#include <gtest/gtest.h>

#include <random>

#include "test_support.hpp"

namespace gantrylab {
namespace {

Image gradient(int w, int h) {
  Image img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      img.at(x, y) = {static_cast<std::uint8_t>(x % 256), static_cast<std::uint8_t>(y % 256),
                      static_cast<std::uint8_t>((x + y) % 256)};
  return img;
}

MasterImageRecord sample_record() {
  MasterImageRecord r;
  r.file_name = "20200601080003-pose0.jpg";
  r.bb_file_name = "20200601080003-pose0-bb.jpg";
  r.date = "2020-06-01";
  r.time = "08:00:03";
  r.room = "LAB1";
  r.institute = "UW";
  r.camera = "GoPro";
  r.lens = "Hero 7 Black";
  r.camera_pose = {100, 200, 300, 135, 45};
  SubimageRecord b;
  b.plant_id = "echcru002";
  b.label = "BarnyardGrass";
  b.scientific_name = "Echinochloa crus-galli";
  b.position_id = 2;
  b.subimage_file_name = "202006010800032.jpg";
  b.date_planted = "2020-05-01";
  b.x_min = 0.1;
  b.x_max = 0.3;
  b.y_min = 0.25;
  b.y_max = 0.8;
  r.bounding_boxes.push_back(b);
  return r;
}

bool has_path(const std::vector<ValidationIssue>& issues, const std::string& path) {
  for (const auto& i : issues)
    if (i.path == path) return true;
  return false;
}

TEST(Crop, IdentityAndQuadrant) {
  const Image img = gradient(400, 300);
  EXPECT_EQ(crop(img, {0, 1, 0, 1}), img);
  const Image q = crop(img, {0, 0.5, 0, 0.5});
  ASSERT_EQ(q.width(), 200);
  ASSERT_EQ(q.height(), 150);
  for (int y = 0; y < 150; ++y)
    for (int x = 0; x < 200; ++x) ASSERT_EQ(q.at(x, y), img.at(x, y));
}

TEST(Crop, FullSizeQuadrant) {
  const Image img(4000, 3000, {1, 2, 3});
  const Image q = crop(img, {0, 0.5, 0, 0.5});
  EXPECT_EQ(q.width(), 2000);
  EXPECT_EQ(q.height(), 1500);
}

TEST(Crop, Errors) {
  const Image img = gradient(100, 100);
  EXPECT_THROW(crop(img, {0.5, 0.5, 0, 1}), CropError);
  EXPECT_THROW(crop(img, {0.501, 0.503, 0, 1}), CropError);  // rounds to zero width
  EXPECT_THROW(crop(img, {-0.1, 0.5, 0, 1}), CropError);
}

TEST(Emit, FieldOrderAndEmptyBoxes) {
  MasterImageRecord r = sample_record();
  r.bounding_boxes.clear();
  const auto j = emit_metadata(r);
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  const std::vector<std::string> expected = {"version", "file_name", "bb_file_name", "date",
                                             "time", "room", "institute", "camera",
                                             "lens", "camera_pose", "bounding_boxes"};
  EXPECT_EQ(keys, expected);
  EXPECT_TRUE(j["bounding_boxes"].is_array());
  EXPECT_TRUE(j["bounding_boxes"].empty());
  EXPECT_EQ(j["version"], "1.5");
}

TEST(Emit, DegenerateBoxRejectedWithPath) {
  MasterImageRecord r = sample_record();
  r.bounding_boxes[0].x_max = r.bounding_boxes[0].x_min;
  try {
    emit_metadata(r);
    FAIL();
  } catch (const ValidationFailed& e) {
    EXPECT_TRUE(has_path(e.issues(), "bounding_boxes[0].x_min"));
  }
}

TEST(Parse, RoundTripIsIdentity) {
  const auto r = sample_record();
  const auto pr = parse_and_validate(emit_metadata_string(r));
  ASSERT_TRUE(pr.ok());
  EXPECT_EQ(*pr.record, r);
}

TEST(Parse, RandomRecordsAreFixedPoints) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 200; ++i) {
    const auto r = testing::random_record(rng);
    const std::string text = emit_metadata_string(r);
    const auto pr = parse_and_validate(text);
    ASSERT_TRUE(pr.ok()) << text;
    EXPECT_EQ(*pr.record, r);
    EXPECT_EQ(emit_metadata_string(*pr.record), text);
  }
}

TEST(Parse, VersionAndFilenameErrors) {
  auto j = emit_metadata(sample_record());
  j["version"] = "1.4";
  j["file_name"] = "2020-06-01.jpg";
  const auto pr = parse_and_validate(j.dump());
  EXPECT_FALSE(pr.ok());
  EXPECT_TRUE(has_path(pr.errors, "version"));
  EXPECT_TRUE(has_path(pr.errors, "file_name"));
}

TEST(Parse, CollectsEveryProblem) {
  auto j = emit_metadata(sample_record());
  j.erase("room");
  j["extra"] = 1;
  j["camera_pose"]["x"] = "left";
  j["bounding_boxes"][0]["y_max"] = 1.5;
  j["bounding_boxes"][0]["position_id"] = 2.5;
  const auto pr = parse_and_validate(j.dump());
  EXPECT_TRUE(has_path(pr.errors, "room"));
  EXPECT_TRUE(has_path(pr.errors, "extra"));
  EXPECT_TRUE(has_path(pr.errors, "camera_pose.x"));
  EXPECT_TRUE(has_path(pr.errors, "bounding_boxes[0].y_max"));
  EXPECT_TRUE(has_path(pr.errors, "bounding_boxes[0].position_id"));
}

TEST(Parse, MalformedJson) {
  const auto pr = parse_and_validate("{\"version\": ");
  EXPECT_FALSE(pr.ok());
  EXPECT_FALSE(pr.record.has_value());
  EXPECT_FALSE(parse_and_validate("[1, 2]").ok());
}

TEST(Parse, SubimageNameMustCarryPositionId) {
  auto r = sample_record();
  r.bounding_boxes[0].subimage_file_name = "202006010800039.jpg";
  EXPECT_TRUE(has_path(validate(r), "bounding_boxes[0].subimage_file_name"));
  r.bounding_boxes[0].subimage_file_name = "2020060108000.jpg";
  EXPECT_TRUE(has_path(validate(r), "bounding_boxes[0].subimage_file_name"));
}

TEST(Names, Patterns) {
  EXPECT_EQ(names::bb_name_for("20200601080003-pose12.jpg"), "20200601080003-pose12-bb.jpg");
  EXPECT_EQ(names::subimage_name("20200601080003", 17, "png"), "2020060108000317.png");
  EXPECT_TRUE(names::valid_stamp("20201231235959"));
  EXPECT_FALSE(names::valid_stamp("20201331235959"));
  EXPECT_FALSE(names::valid_stamp("20201231245959"));
}

TEST(LegacyOrigin, MirrorsXAndRoundTrips) {
  const auto r = sample_record();
  const auto j = emit_metadata(r, BoxOrigin::UpperRight);
  EXPECT_NEAR(j["bounding_boxes"][0]["x_min"].get<double>(), 0.7, 1e-15);
  EXPECT_NEAR(j["bounding_boxes"][0]["x_max"].get<double>(), 0.9, 1e-15);
  EXPECT_EQ(j["bounding_boxes"][0]["y_min"].get<double>(), 0.25);
  const auto pr = parse_and_validate(j.dump(), BoxOrigin::UpperRight);
  ASSERT_TRUE(pr.ok());
  EXPECT_NEAR(pr.record->bounding_boxes[0].x_min, 0.1, 1e-15);
  EXPECT_NEAR(pr.record->bounding_boxes[0].x_max, 0.3, 1e-15);
}

TEST(DrawBoxes, OutlineOnly) {
  const Image img(100, 100, {0, 0, 0});
  const Image out = draw_boxes(img, {{0.2, 0.6, 0.2, 0.6}});
  EXPECT_EQ(out.at(20, 20), (Rgb{255, 0, 0}));
  EXPECT_EQ(out.at(22, 40), (Rgb{255, 0, 0}));
  EXPECT_EQ(out.at(23, 40), (Rgb{0, 0, 0}));
  EXPECT_EQ(out.at(59, 59), (Rgb{255, 0, 0}));
  EXPECT_EQ(out.at(60, 60), (Rgb{0, 0, 0}));
  EXPECT_EQ(out.at(40, 40), (Rgb{0, 0, 0}));
}

TEST(ClassifyPosition, Examples) {
  const Volume v;
  EXPECT_EQ(classify_position(0, {0, 0, 0}, v, 100), PositionClass::Edge);
  EXPECT_EQ(classify_position(0, {575, 420, 0}, v, 100), PositionClass::Interior);
  EXPECT_EQ(classify_position(0, {1, 1, 0}, v, 0), PositionClass::Interior);
  EXPECT_EQ(classify_position(0, {100, 420, 0}, v, 100), PositionClass::Edge);
  EXPECT_EQ(classify_position(0, {101, 420, 0}, v, 100), PositionClass::Interior);
}

}  // namespace
}  // namespace gantrylab
