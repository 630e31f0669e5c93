#include "scenefill/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <nlohmann/json.hpp>

#include "scenefill/io.hpp"

namespace scenefill::metrics {

double psnr_masked(const RgbImage& a, const RgbImage& b, const BinaryMask& mask, double max_val) {
  if (a.width() != b.width() || a.height() != b.height() || a.width() != mask.width() ||
      a.height() != mask.height())
    throw DimensionError("psnr_masked: shape mismatch");
  if (!(max_val > 0)) throw ConfigError("psnr_masked: max_val must be positive");
  double sum_sq = 0.0;
  std::int64_t count = 0;
  for (long i = 0; i < mask.values.size(); ++i) {
    if (mask.values.data()[i] == 0) continue;
    const double dr = double(a.r.data()[i]) - double(b.r.data()[i]);
    const double dg = double(a.g.data()[i]) - double(b.g.data()[i]);
    const double db = double(a.b.data()[i]) - double(b.b.data()[i]);
    sum_sq += dr * dr + dg * dg + db * db;
    ++count;
  }
  if (count == 0) throw DataError("psnr_masked: empty mask");
  const double mse = sum_sq / (3.0 * double(count));
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(max_val * max_val / mse));
}

double psnr_outside_mask(const RgbImage& a, const RgbImage& b, const BinaryMask& object_mask,
                         double max_val) {
  GridU8 inv = (object_mask.values == 0).cast<std::uint8_t>();
  BinaryMask complement{std::move(inv)};
  if (complement.empty()) throw DataError("psnr_outside_mask: object mask covers the entire image");
  return psnr_masked(a, b, complement, max_val);
}

double mad(const DepthMap& d_a, const DepthMap& d_b, const BinaryMask& mask) {
  if (!same_shape(d_a.values, d_b.values) || !same_shape(d_a.values, mask.values))
    throw DimensionError("mad: shape mismatch");
  double sum = 0.0;
  std::int64_t count = 0;
  for (long i = 0; i < mask.values.size(); ++i) {
    if (mask.values.data()[i] == 0) continue;
    const float va = d_a.values.data()[i], vb = d_b.values.data()[i];
    if (va <= 0.0f || vb <= 0.0f) throw DataError("mad: invalid depth inside mask");
    sum += std::abs(double(va) - double(vb));
    ++count;
  }
  if (count == 0) throw DataError("mad: empty mask");
  return sum / double(count);
}

double variance_of_laplacian(const GridD& img) {
  const long h = img.rows(), w = img.cols();
  if (h < 3 || w < 3) throw DataError("variance_of_laplacian: image smaller than 3x3");
  double sum = 0.0, sum_sq = 0.0;
  const long count = (h - 2) * (w - 2);
  for (long v = 1; v < h - 1; ++v) {
    for (long u = 1; u < w - 1; ++u) {
      const double lap =
          img(v - 1, u) + img(v + 1, u) + img(v, u - 1) + img(v, u + 1) - 4.0 * img(v, u);
      sum += lap;
      sum_sq += lap * lap;
    }
  }
  const double mean = sum / double(count);
  return sum_sq / double(count) - mean * mean;
}

GridD luma(const RgbImage& img) {
  return 0.299 * img.r.cast<double>() + 0.587 * img.g.cast<double>() + 0.114 * img.b.cast<double>();
}

double mask_iou(const BinaryMask& a, const BinaryMask& b) {
  if (!same_shape(a.values, b.values)) throw DimensionError("mask_iou: shape mismatch");
  std::int64_t inter = 0, uni = 0;
  for (long i = 0; i < a.values.size(); ++i) {
    const bool pa = a.values.data()[i] == 1, pb = b.values.data()[i] == 1;
    inter += pa && pb;
    uni += pa || pb;
  }
  if (uni == 0) return 1.0;  // both empty match perfectly
  return double(inter) / double(uni);
}

void MetricReport::add(const MetricRecord& r) {
  if (r.pixels <= 0) throw DataError("metric report: pixel count must be positive");
  records.push_back(r);
}

std::vector<MetricRecord> MetricReport::aggregates() const {
  std::map<std::pair<std::string, std::string>, std::pair<double, std::int64_t>> acc;
  for (const MetricRecord& r : records) {
    auto& slot = acc[{r.metric, r.mask}];
    slot.first += r.value * double(r.pixels);
    slot.second += r.pixels;
  }
  std::vector<MetricRecord> out;
  for (const auto& [key, slot] : acc)
    out.push_back({"aggregate", key.first, key.second, slot.first / double(slot.second), slot.second});
  return out;
}

std::string MetricReport::to_json() const {
  nlohmann::json doc;
  auto record_json = [](const MetricRecord& r) {
    return nlohmann::json{{"view_id", r.view_id},
                          {"metric", r.metric},
                          {"mask", r.mask},
                          {"value", r.value},
                          {"pixels", r.pixels}};
  };
  doc["records"] = nlohmann::json::array();
  for (const MetricRecord& r : records) doc["records"].push_back(record_json(r));
  doc["aggregate"] = nlohmann::json::array();
  for (const MetricRecord& r : aggregates()) doc["aggregate"].push_back(record_json(r));
  doc["unavailable"] = {"lpips", "ssim"};
  return doc.dump(2) + "\n";
}

void MetricReport::write(const std::filesystem::path& path) const { io::write_file(path, to_json()); }

}  // namespace scenefill::metrics
