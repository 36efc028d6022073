#pragma once

#include "anacp/types.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace anacp {

/// Labeled feature vectors. Features stay 32-bit as stored; use as_double()
/// before doing any linear algebra on them.
struct FeatureDataset {
  FeatureMatrix features;
  std::vector<ClassId> labels;
  std::uint32_t num_classes = 0;
  std::vector<std::string> class_names;

  Index rows() const { return features.rows(); }
  Index dim() const { return features.cols(); }

  Matrix as_double() const { return features.cast<double>(); }

  /// Copy of the given rows, preserving num_classes and class_names.
  FeatureDataset select(std::span<const Index> row_indices) const;

  /// Throws on row/label count mismatch, empty data, or labels >= num_classes.
  void validate() const;
};

inline constexpr char kFeatureMagic[4] = {'F', 'E', 'A', 'T'};
inline constexpr std::uint8_t kFeatureVersion = 1;

/// Layout: "FEAT", u8 version, u32 N, u32 d, u32 C, N*d little-endian f32
/// (row-major), N little-endian u32 labels.
std::vector<std::uint8_t> encode_features(const FeatureDataset& data);
FeatureDataset decode_features(std::span<const std::uint8_t> bytes);

void save_feature_file(const std::filesystem::path& path, const FeatureDataset& data);
FeatureDataset load_feature_file(const std::filesystem::path& path);

/// FNV-1a 64 of the file contents as 16 lowercase hex digits.
std::string file_checksum(const std::filesystem::path& path);

struct ManifestEntry {
  std::string split;
  std::string file;
  std::uint32_t rows = 0;
  std::uint32_t dim = 0;
  std::string checksum;
};

/// Sidecar metadata written next to feature files.
struct Manifest {
  std::string dataset;
  std::string source_ptm;
  std::string preprocessing;
  std::uint32_t num_classes = 0;
  std::vector<std::string> class_names;
  std::vector<ManifestEntry> files;
};

void save_manifest(const std::filesystem::path& path, const Manifest& manifest);
Manifest load_manifest(const std::filesystem::path& path);

struct Task {
  std::vector<ClassId> classes;
  FeatureDataset train;
  FeatureDataset test;
};

struct TaskStream {
  std::vector<Task> tasks;
  std::uint64_t seed = 0;

  std::size_t size() const { return tasks.size(); }
};

/// Shuffles the class ids with `seed`, then cuts them into `num_tasks`
/// contiguous groups of floor(C / num_tasks); leftover classes join the last
/// task. Each sample follows its label into the matching task.
TaskStream make_task_stream(const FeatureDataset& train, const FeatureDataset& test,
                            int num_tasks, std::uint64_t seed);

enum class CovarianceKind { identity, random_spd };

struct SynthSpec {
  int dim = 64;
  int num_classes = 20;
  int train_per_class = 100;
  int test_per_class = 100;
  // Expected Euclidean norm of a class mean, in units of the per-coordinate
  // noise standard deviation.
  double mean_scale = 2.0;
  CovarianceKind covariance = CovarianceKind::identity;
  double kappa = 1.0;
  std::uint64_t seed = 0;
  // When > 0, class means are drawn around this many shared centres; each
  // class sits at centre + cluster_spread * (its own offset).
  int num_clusters = 0;
  double cluster_spread = 0.25;

  void validate() const;
};

/// Generating distribution, kept so tests can evaluate the Bayes rule.
struct SynthTruth {
  Matrix means;       // d x C, column c is the mean of class c
  Matrix covariance;  // d x d
};

struct SynthData {
  FeatureDataset train;
  FeatureDataset test;
  SynthTruth truth;
};

SynthData generate_synthetic(const SynthSpec& spec);

}  // namespace anacp
