#include "anacp/feature_store.hpp"

#include "anacp/error.hpp"
#include "anacp/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <sstream>

namespace anacp {

namespace {

constexpr std::size_t kHeaderBytes = 4 + 1 + 3 * 4;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::vector<std::uint8_t> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

FeatureDataset FeatureDataset::select(std::span<const Index> row_indices) const {
  FeatureDataset out;
  out.num_classes = num_classes;
  out.class_names = class_names;
  out.features.resize(static_cast<Index>(row_indices.size()), dim());
  out.labels.reserve(row_indices.size());
  for (std::size_t i = 0; i < row_indices.size(); ++i) {
    out.features.row(static_cast<Index>(i)) = features.row(row_indices[i]);
    out.labels.push_back(labels[static_cast<std::size_t>(row_indices[i])]);
  }
  return out;
}

void FeatureDataset::validate() const {
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    throw Error(Errc::dimension_mismatch, "feature rows (" + std::to_string(features.rows()) +
                                              ") != label count (" + std::to_string(labels.size()) + ")");
  }
  if (features.rows() == 0 || features.cols() == 0) {
    throw Error(Errc::invalid_argument, "dataset must have N > 0 and d > 0");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= num_classes) {
      throw Error(Errc::label_out_of_range, "label " + std::to_string(labels[i]) + " at row " +
                                                std::to_string(i) + " >= class count " +
                                                std::to_string(num_classes));
    }
  }
}

std::vector<std::uint8_t> encode_features(const FeatureDataset& data) {
  data.validate();
  const auto n = static_cast<std::size_t>(data.rows());
  const auto d = static_cast<std::size_t>(data.dim());
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + 4 * n * d + 4 * n);
  out.insert(out.end(), std::begin(kFeatureMagic), std::end(kFeatureMagic));
  out.push_back(kFeatureVersion);
  put_u32(out, static_cast<std::uint32_t>(n));
  put_u32(out, static_cast<std::uint32_t>(d));
  put_u32(out, data.num_classes);
  const float* values = data.features.data();
  for (std::size_t i = 0; i < n * d; ++i) put_u32(out, std::bit_cast<std::uint32_t>(values[i]));
  for (ClassId label : data.labels) put_u32(out, label);
  return out;
}

FeatureDataset decode_features(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 5 || std::memcmp(bytes.data(), kFeatureMagic, 4) != 0) {
    throw Error(Errc::bad_magic, "not a feature file");
  }
  if (bytes[4] != kFeatureVersion) {
    throw Error(Errc::bad_magic, "unsupported feature file version " + std::to_string(bytes[4]));
  }
  if (bytes.size() < kHeaderBytes) throw Error(Errc::truncated_file, "header incomplete");
  const std::uint32_t n = get_u32(bytes.data() + 5);
  const std::uint32_t d = get_u32(bytes.data() + 9);
  const std::uint32_t c = get_u32(bytes.data() + 13);
  const std::uint64_t expected = kHeaderBytes + 4ull * n * d + 4ull * n;
  if (bytes.size() < expected) {
    throw Error(Errc::truncated_file, "header promises " + std::to_string(expected) + " bytes, got " +
                                          std::to_string(bytes.size()));
  }

  FeatureDataset data;
  data.num_classes = c;
  data.features.resize(n, d);
  const std::uint8_t* p = bytes.data() + kHeaderBytes;
  float* values = data.features.data();
  for (std::uint64_t i = 0; i < std::uint64_t{n} * d; ++i, p += 4) {
    values[i] = std::bit_cast<float>(get_u32(p));
  }
  data.labels.resize(n);
  for (std::uint32_t i = 0; i < n; ++i, p += 4) data.labels[i] = get_u32(p);
  data.validate();
  return data;
}

void save_feature_file(const std::filesystem::path& path, const FeatureDataset& data) {
  const auto bytes = encode_features(data);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::io_error, "short write to " + path.string());
}

FeatureDataset load_feature_file(const std::filesystem::path& path) {
  const auto bytes = read_all(path);
  return decode_features(bytes);
}

std::string file_checksum(const std::filesystem::path& path) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (std::uint8_t byte : read_all(path)) {
    hash ^= byte;
    hash *= 0x100000001b3ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << hash;
  return os.str();
}

void save_manifest(const std::filesystem::path& path, const Manifest& manifest) {
  nlohmann::ordered_json j;
  j["dataset"] = manifest.dataset;
  j["source_ptm"] = manifest.source_ptm;
  j["preprocessing"] = manifest.preprocessing;
  j["num_classes"] = manifest.num_classes;
  j["class_names"] = manifest.class_names;
  j["files"] = nlohmann::ordered_json::array();
  for (const auto& f : manifest.files) {
    nlohmann::ordered_json entry;
    entry["split"] = f.split;
    entry["file"] = f.file;
    entry["rows"] = f.rows;
    entry["dim"] = f.dim;
    entry["checksum"] = f.checksum;
    j["files"].push_back(entry);
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  Manifest m;
  try {
    const auto j = nlohmann::json::parse(in);
    m.dataset = j.value("dataset", "");
    m.source_ptm = j.value("source_ptm", "");
    m.preprocessing = j.value("preprocessing", "");
    m.num_classes = j.at("num_classes").get<std::uint32_t>();
    m.class_names = j.value("class_names", std::vector<std::string>{});
    for (const auto& f : j.value("files", nlohmann::json::array())) {
      m.files.push_back({f.at("split").get<std::string>(), f.at("file").get<std::string>(),
                         f.value("rows", 0u), f.value("dim", 0u), f.value("checksum", "")});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse_error, path.string() + ": " + e.what());
  }
  return m;
}

TaskStream make_task_stream(const FeatureDataset& train, const FeatureDataset& test, int num_tasks,
                            std::uint64_t seed) {
  train.validate();
  test.validate();
  if (train.dim() != test.dim()) {
    throw Error(Errc::dimension_mismatch, "train and test feature dimensions differ");
  }
  const std::uint32_t num_classes = std::max(train.num_classes, test.num_classes);
  if (num_tasks < 1) throw Error(Errc::invalid_argument, "num_tasks must be >= 1");
  if (static_cast<std::uint32_t>(num_tasks) > num_classes) {
    throw Error(Errc::too_many_tasks, std::to_string(num_tasks) + " tasks for " +
                                          std::to_string(num_classes) + " classes");
  }

  std::vector<ClassId> order(num_classes);
  for (ClassId c = 0; c < num_classes; ++c) order[c] = c;
  Rng rng(seed);
  rng.shuffle(std::span<ClassId>(order));

  const std::uint32_t per_task = num_classes / static_cast<std::uint32_t>(num_tasks);
  std::vector<int> task_of(num_classes, 0);
  TaskStream stream;
  stream.seed = seed;
  stream.tasks.resize(static_cast<std::size_t>(num_tasks));
  for (std::uint32_t pos = 0; pos < num_classes; ++pos) {
    const int t = std::min<int>(static_cast<int>(pos / per_task), num_tasks - 1);
    task_of[order[pos]] = t;
    stream.tasks[static_cast<std::size_t>(t)].classes.push_back(order[pos]);
  }

  auto split = [&](const FeatureDataset& data, auto member) {
    std::vector<std::vector<Index>> rows(static_cast<std::size_t>(num_tasks));
    for (std::size_t i = 0; i < data.labels.size(); ++i) {
      rows[static_cast<std::size_t>(task_of[data.labels[i]])].push_back(static_cast<Index>(i));
    }
    for (std::size_t t = 0; t < rows.size(); ++t) {
      FeatureDataset part = data.select(rows[t]);
      part.num_classes = num_classes;
      stream.tasks[t].*member = std::move(part);
    }
  };
  split(train, &Task::train);
  split(test, &Task::test);
  return stream;
}

void SynthSpec::validate() const {
  auto fail = [](const std::string& what) { throw Error(Errc::invalid_argument, what); };
  if (dim < 2) fail("synthetic dimension must be >= 2 (got " + std::to_string(dim) + ")");
  if (num_classes < 2) fail("synthetic class count must be >= 2 (got " + std::to_string(num_classes) + ")");
  if (train_per_class < 1 || test_per_class < 1) fail("samples per class must be >= 1");
  if (!(mean_scale >= 0.0) || !std::isfinite(mean_scale)) fail("mean_scale must be finite and >= 0");
  if (!(kappa >= 1.0) || !std::isfinite(kappa)) fail("kappa must be finite and >= 1");
  if (num_clusters < 0) fail("num_clusters must be >= 0");
  if (!(cluster_spread >= 0.0)) fail("cluster_spread must be >= 0");
}

SynthData generate_synthetic(const SynthSpec& spec) {
  spec.validate();
  const Index d = spec.dim;
  const Index num_classes = spec.num_classes;
  Rng rng(spec.seed);
  auto gaussian = [&](Index rows, Index cols) {
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
    return m;
  };

  // Per-coordinate std mean_scale / sqrt(d) gives E||mu_c||^2 = mean_scale^2.
  const double coord_scale = spec.mean_scale / std::sqrt(static_cast<double>(d));
  SynthTruth truth;
  if (spec.num_clusters > 0) {
    const Matrix centres = coord_scale * gaussian(d, spec.num_clusters);
    const Matrix offsets = coord_scale * spec.cluster_spread * gaussian(d, num_classes);
    truth.means.resize(d, num_classes);
    for (Index c = 0; c < num_classes; ++c) {
      truth.means.col(c) = centres.col(c % spec.num_clusters) + offsets.col(c);
    }
  } else {
    truth.means = coord_scale * gaussian(d, num_classes);
  }

  // Noise factor L with L L^T = covariance.
  Matrix factor = Matrix::Identity(d, d);
  truth.covariance = Matrix::Identity(d, d);
  if (spec.covariance == CovarianceKind::random_spd) {
    Eigen::HouseholderQR<Matrix> qr(gaussian(d, d));
    Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index j = 0; j < d; ++j) {
      if (r(j, j) < 0) q.col(j) = -q.col(j);
    }
    Vector eig(d);
    const double log_kappa = std::log(spec.kappa);
    for (Index i = 0; i < d; ++i) eig(i) = std::exp(log_kappa * rng.uniform());
    eig /= eig.mean();
    factor = q * eig.cwiseSqrt().asDiagonal();
    truth.covariance = q * eig.asDiagonal() * q.transpose();
  }

  auto draw = [&](int per_class) {
    FeatureDataset data;
    data.num_classes = static_cast<std::uint32_t>(num_classes);
    for (Index c = 0; c < num_classes; ++c) data.class_names.push_back("class_" + std::to_string(c));
    data.features.resize(num_classes * per_class, d);
    data.labels.resize(static_cast<std::size_t>(num_classes * per_class));
    Index row = 0;
    for (Index c = 0; c < num_classes; ++c) {
      for (int k = 0; k < per_class; ++k, ++row) {
        Vector z(d);
        for (Index i = 0; i < d; ++i) z(i) = rng.normal();
        const Vector x = truth.means.col(c) + factor * z;
        data.features.row(row) = x.transpose().cast<float>();
        data.labels[static_cast<std::size_t>(row)] = static_cast<ClassId>(c);
      }
    }
    return data;
  };

  SynthData out;
  out.train = draw(spec.train_per_class);
  out.test = draw(spec.test_per_class);
  out.truth = std::move(truth);
  return out;
}

}  // namespace anacp
