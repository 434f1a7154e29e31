#include <gtest/gtest.h>

#include <filesystem>
#include <string>

#include "sfod/errors.hpp"
#include "sfod/io.hpp"
#include "sfod/surrogate.hpp"
#include "support/random_data.hpp"

namespace sfod {
namespace {

const std::filesystem::path kFixtures = SFOD_FIXTURE_DIR;

TEST(IoTest, GoldenFixtureParses) {
  const auto text = read_text_file(kFixtures / "two_images.json");
  const auto ds = dataset_from_json(text);
  ASSERT_EQ(ds.images.size(), 2u);
  EXPECT_EQ(ds.category_names, (std::vector<std::string>{"car", "person"}));
  const auto& a = ds.images[0];
  EXPECT_EQ(a.id, "a");
  EXPECT_DOUBLE_EQ(a.width, 320);
  ASSERT_EQ(a.detections.size(), 2u);
  EXPECT_EQ(a.detections[0].box(), BoundingBox(10, 20, 50.5, 60));
  EXPECT_DOUBLE_EQ(a.detections[0].confidence(), 0.7);
  EXPECT_EQ(a.detections[1].category(), 1);
  ASSERT_TRUE(a.ground_truth);
  EXPECT_EQ((*a.ground_truth)[0].box, BoundingBox(12, 20, 50, 61));
  EXPECT_FALSE(ds.images[1].ground_truth);
  EXPECT_TRUE(ds.images[1].detections.empty());
}

TEST(IoTest, GoldenFixtureIsCanonical) {
  const auto text = read_text_file(kFixtures / "two_images.json");
  EXPECT_EQ(dataset_to_json(dataset_from_json(text)), text);
}

TEST(IoTest, BadProbabilitiesNameTheImage) {
  try {
    load_dataset(kFixtures / "bad_probs.json");
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("frame_7"), std::string::npos) << what;
    EXPECT_NE(what.find("probs"), std::string::npos) << what;
  }
}

TEST(IoTest, SchemaErrors) {
  EXPECT_THROW(dataset_from_json("[]"), ValidationError);
  EXPECT_THROW(dataset_from_json("{not json"), ValidationError);
  EXPECT_THROW(dataset_from_json(R"({"format":"other","version":1,"categories":["a"],"images":[]})"),
               ValidationError);
  EXPECT_THROW(dataset_from_json(R"({"format":"sfod-dataset","version":9,"categories":["a"],"images":[]})"),
               ValidationError);
  EXPECT_THROW(dataset_from_json(
                   R"({"format":"sfod-dataset","version":1,"categories":["a"],"images":[{"id":"q","width":5,"height":5,"ground_truth":[{"box":[0,0,9,9],"category":0}]}]})"),
               ValidationError);
  EXPECT_THROW(read_text_file(kFixtures / "missing.json"), ValidationError);
}

TEST(IoTest, RandomDatasetsRoundTrip) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto ds = testing::random_dataset(seed, 4, 3, seed % 2 == 0);
    const auto text = dataset_to_json(ds);
    const auto back = dataset_from_json(text);
    ASSERT_EQ(back, ds);
    ASSERT_EQ(dataset_to_json(back), text);
  }
}

TEST(IoTest, WorldRoundTrip) {
  WorldConfig c;
  c.image_count = 4;
  const auto w = generate_world(c);
  const auto back = world_from_json(world_to_json(w));
  EXPECT_EQ(back, w);
  const auto dets = predict(make_source_model(w, 0.55), w);
  const auto text = world_to_json(w, &dets);
  EXPECT_EQ(world_from_json(text), w);
  EXPECT_EQ(dataset_from_json(text), dets);
}

TEST(IoTest, PseudoLabelsRoundTrip) {
  const auto ds = testing::random_dataset(3, 5, 2);
  const auto labels = generate_pseudo_labels(ds, 0.3);
  EXPECT_EQ(pseudo_labels_from_json(pseudo_labels_to_json(labels)), labels);
}

TEST(IoTest, AtomicWriteReplacesFile) {
  const auto dir = std::filesystem::temp_directory_path() / "sfod_io_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "x.json";
  write_file_atomic(path, "first");
  write_file_atomic(path, "second");
  EXPECT_EQ(read_text_file(path), "second");
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) {
    ++files;
  }
  EXPECT_EQ(files, 1u);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace sfod
