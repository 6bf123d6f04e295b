#include "ffvos/ingest/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iterator>

#include <json.hpp>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "ffvos/core/error.hpp"

namespace ffvos::ingest {
namespace {

using nlohmann::json;

bool is_image_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

std::optional<long> numeric_stem(const fs::path& p) {
  const std::string stem = p.stem().string();
  if (stem.empty() || !std::all_of(stem.begin(), stem.end(), [](unsigned char c) { return std::isdigit(c); })) {
    return std::nullopt;
  }
  return std::stol(stem);
}

cv::Mat read_image(const fs::path& path, int flags) {
  cv::Mat img = cv::imread(path.string(), flags);
  if (img.empty()) throw IngestError("cannot read image: " + path.string());
  if (img.depth() != CV_8U) throw IngestError("expected 8-bit image: " + path.string());
  return img;
}

void write_image(const cv::Mat& img, const fs::path& path) {
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), img);
  } catch (const cv::Exception& e) {
    throw WriteError("cannot write " + path.string() + ": " + e.what());
  }
  if (!ok) throw WriteError("cannot write " + path.string());
}

std::uint32_t read_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u32le(std::string& out, std::uint32_t v) {
  for (int s = 0; s < 32; s += 8) out.push_back(static_cast<char>((v >> s) & 0xffu));
}

}  // namespace

fs::path SequenceLayout::features_file(int frame) const {
  return root / "features" / (frame_stem(frame) + ".feat");
}

std::string frame_stem(int frame) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%05d", frame);
  return buf;
}

std::vector<fs::path> list_numbered_images(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IngestError("not a directory: " + dir.string());
  std::vector<std::pair<long, fs::path>> found;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || !is_image_extension(entry.path())) continue;
    if (auto n = numeric_stem(entry.path())) found.emplace_back(*n, entry.path());
  }
  std::sort(found.begin(), found.end());
  for (std::size_t i = 1; i < found.size(); ++i) {
    if (found[i].first == found[i - 1].first) {
      throw IngestError("duplicate frame number: " + found[i].second.string());
    }
  }
  std::vector<fs::path> out;
  out.reserve(found.size());
  for (auto& [n, p] : found) out.push_back(std::move(p));
  return out;
}

VideoSequence load_sequence(const fs::path& frames_dir) {
  const auto files = list_numbered_images(frames_dir);
  if (files.empty()) throw IngestError("no numbered frames in " + frames_dir.string());

  VideoSequence seq;
  seq.name = frames_dir.parent_path().filename().string();
  seq.frames.reserve(files.size());
  for (const auto& path : files) {
    const cv::Mat img = read_image(path, cv::IMREAD_COLOR);
    if (!seq.frames.empty() && (img.cols != seq.width() || img.rows != seq.height())) {
      throw IngestError("frame size " + std::to_string(img.cols) + "x" + std::to_string(img.rows) +
                        " differs from first frame: " + path.string());
    }
    std::vector<float> rgb(3 * static_cast<std::size_t>(img.cols) * img.rows);
    std::size_t i = 0;
    for (int y = 0; y < img.rows; ++y) {
      const auto* row = img.ptr<cv::Vec3b>(y);
      for (int x = 0; x < img.cols; ++x) {
        // OpenCV decodes as BGR.
        rgb[i++] = row[x][2] / 255.0f;
        rgb[i++] = row[x][1] / 255.0f;
        rgb[i++] = row[x][0] / 255.0f;
      }
    }
    seq.frames.emplace_back(img.cols, img.rows, std::move(rgb));
  }
  return seq;
}

SoftMask read_score_map(const fs::path& path) {
  const cv::Mat img = read_image(path, cv::IMREAD_GRAYSCALE);
  std::vector<double> v(static_cast<std::size_t>(img.cols) * img.rows);
  std::size_t i = 0;
  for (int y = 0; y < img.rows; ++y) {
    const auto* row = img.ptr<std::uint8_t>(y);
    for (int x = 0; x < img.cols; ++x) v[i++] = row[x] / 255.0;
  }
  return SoftMask(img.cols, img.rows, std::move(v));
}

BinaryMask read_binary_mask(const fs::path& path) {
  const cv::Mat img = read_image(path, cv::IMREAD_UNCHANGED);
  const int channels = img.channels();
  BinaryMask m(img.cols, img.rows);
  for (int y = 0; y < img.rows; ++y) {
    const auto* row = img.ptr<std::uint8_t>(y);
    for (int x = 0; x < img.cols; ++x) {
      bool on = false;
      for (int c = 0; c < std::min(channels, 3); ++c) on = on || row[x * channels + c] != 0;
      m.set(x, y, on);
    }
  }
  return m;
}

ProposalSet load_proposal_set(const fs::path& proposals_dir, int frame,
                              std::optional<std::pair<int, int>> frame_size) {
  const fs::path dir = proposals_dir / frame_stem(frame);
  const fs::path manifest_path = dir / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) throw IngestError("missing proposal manifest: " + manifest_path.string());

  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw IngestError("malformed manifest " + manifest_path.string() + ": " + e.what());
  }
  if (!doc.contains("proposals") || !doc["proposals"].is_array()) {
    throw IngestError("manifest has no proposals array: " + manifest_path.string());
  }
  if (doc.contains("frame") && (!doc["frame"].is_number_integer() || doc["frame"].get<int>() != frame)) {
    throw IngestError("manifest frame field does not match directory: " + manifest_path.string());
  }

  ProposalSet ps;
  ps.frame_index = frame;
  int index = 0;
  for (const auto& entry : doc["proposals"]) {
    if (!entry.contains("mask") || !entry.contains("score") || !entry["score"].is_number()) {
      throw IngestError("manifest entry " + std::to_string(index) + " lacks mask/score: " +
                        manifest_path.string());
    }
    if (!entry["mask"].is_string()) {
      throw IngestError("manifest entry " + std::to_string(index) + " mask is not a string: " +
                        manifest_path.string());
    }
    const fs::path mask_path = dir / entry["mask"].get<std::string>();
    const double score = entry["score"].get<double>();
    if (!std::isfinite(score)) throw IngestError("non-finite score in " + manifest_path.string());
    SoftMask map = read_score_map(mask_path);
    const auto [w, h] = frame_size.value_or(std::pair{map.width(), map.height()});
    if (map.width() != w || map.height() != h ||
        (!ps.proposals.empty() && (map.width() != ps.proposals.front().score_map.width() ||
                                   map.height() != ps.proposals.front().score_map.height()))) {
      throw IngestError("score map dimensions do not match frame: " + mask_path.string());
    }
    ps.proposals.push_back({std::move(map), score, index++});
  }
  std::stable_sort(ps.proposals.begin(), ps.proposals.end(),
                   [](const Proposal& a, const Proposal& b) { return a.objectness > b.objectness; });
  return ps;
}

std::vector<Descriptor> load_descriptor_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open descriptor file: " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || !std::equal(bytes.begin(), bytes.begin() + 4, "FEAT")) {
    throw IngestError("bad FEAT magic: " + path.string());
  }
  const std::uint32_t count = read_u32le(bytes.data() + 4);
  const std::uint32_t dim = read_u32le(bytes.data() + 8);
  if (dim == 0) throw IngestError("FEAT dim must be >= 1: " + path.string());
  const std::uint64_t expected = 12 + 4ull * count * dim;
  if (bytes.size() != expected) {
    throw IngestError("FEAT payload size " + std::to_string(bytes.size()) + " != expected " +
                      std::to_string(expected) + ": " + path.string());
  }

  std::vector<Descriptor> out(count);
  const unsigned char* p = bytes.data() + 12;
  for (auto& d : out) {
    d.values.resize(dim);
    for (auto& v : d.values) {
      const float f = std::bit_cast<float>(read_u32le(p));
      p += 4;
      if (!std::isfinite(f)) throw IngestError("non-finite descriptor value: " + path.string());
      v = f;
    }
  }
  return out;
}

void write_descriptor_file(std::span<const Descriptor> descriptors, const fs::path& path) {
  const std::uint32_t dim = descriptors.empty() ? 1u : static_cast<std::uint32_t>(descriptors[0].dim());
  std::string buf = "FEAT";
  put_u32le(buf, static_cast<std::uint32_t>(descriptors.size()));
  put_u32le(buf, dim);
  for (const auto& d : descriptors) {
    if (d.dim() != dim) throw InvalidInput("write_descriptor_file: inconsistent dimensions");
    for (double v : d.values) put_u32le(buf, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out.write(buf.data(), static_cast<std::streamsize>(buf.size()))) {
    throw WriteError("cannot write " + path.string());
  }
}

void write_binary_mask(const BinaryMask& m, const fs::path& path) {
  cv::Mat img(m.height(), m.width(), CV_8UC1);
  for (int y = 0; y < m.height(); ++y) {
    auto* row = img.ptr<std::uint8_t>(y);
    for (int x = 0; x < m.width(); ++x) row[x] = m.at(x, y) ? 255 : 0;
  }
  write_image(img, path);
}

void write_score_map(const SoftMask& m, const fs::path& path) {
  cv::Mat img(m.height(), m.width(), CV_8UC1);
  for (int y = 0; y < m.height(); ++y) {
    auto* row = img.ptr<std::uint8_t>(y);
    for (int x = 0; x < m.width(); ++x) {
      row[x] = static_cast<std::uint8_t>(std::lround(std::clamp(m.at(x, y), 0.0, 1.0) * 255.0));
    }
  }
  write_image(img, path);
}

void write_frame(const Frame& f, const fs::path& path) {
  cv::Mat img(f.height(), f.width(), CV_8UC3);
  for (int y = 0; y < f.height(); ++y) {
    auto* row = img.ptr<cv::Vec3b>(y);
    for (int x = 0; x < f.width(); ++x) {
      const Rgb c = f.at(x, y);
      row[x] = cv::Vec3b(static_cast<std::uint8_t>(std::lround(c.b * 255.0)),
                         static_cast<std::uint8_t>(std::lround(c.g * 255.0)),
                         static_cast<std::uint8_t>(std::lround(c.r * 255.0)));
    }
  }
  write_image(img, path);
}

void write_proposal_set(const ProposalSet& ps, const fs::path& proposals_dir) {
  const fs::path dir = proposals_dir / frame_stem(ps.frame_index);
  fs::create_directories(dir);
  json doc;
  doc["frame"] = ps.frame_index;
  doc["proposals"] = json::array();
  std::vector<const Proposal*> order;
  for (const auto& p : ps.proposals) order.push_back(&p);
  std::stable_sort(order.begin(), order.end(), [](const Proposal* a, const Proposal* b) {
    return a->manifest_index < b->manifest_index;
  });
  for (std::size_t i = 0; i < order.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "m_%02zu.png", i);
    write_score_map(order[i]->score_map, dir / name);
    doc["proposals"].push_back({{"mask", name}, {"score", order[i]->objectness}});
  }
  std::ofstream out(dir / "manifest.json");
  out << doc.dump(2) << '\n';
  if (!out) throw WriteError("cannot write manifest in " + dir.string());
}

}  // namespace ffvos::ingest
