#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace xbarnn {

enum class Split { Train, Test };

struct Dataset {
    Eigen::MatrixXd images;   // count x 784, pixel values in [0, 1]
    std::vector<int> labels;  // 0..9
    Split split = Split::Train;

    Eigen::Index count() const { return images.rows(); }
    bool empty() const { return images.rows() == 0; }
};

// IDX container, big-endian: magic 0x00000803, then n x 28 x 28 unsigned
// bytes flattened row-major and scaled to [0, 1].
Eigen::MatrixXd load_idx_images(const std::string& path);

// IDX label container, magic 0x00000801, values 0..9.
std::vector<int> load_idx_labels(const std::string& path);

Dataset load_dataset(const std::string& images_path, const std::string& labels_path,
                     Split split);

// Exact inverses of the loaders (pixels are snapped to the byte grid).
void write_idx_images(const std::string& path, const Eigen::MatrixXd& images);
void write_idx_labels(const std::string& path, const std::vector<int>& labels);

// Seeded permutation cut into contiguous chunks; the last chunk may be
// short. The same seed always yields the same order.
std::vector<std::vector<Eigen::Index>> batches(const Dataset& ds, Eigen::Index batch_size,
                                               uint64_t seed);

// Procedural 28x28 digit corpus: segment-stroke glyphs under random affine
// jitter, stroke width, intensity, and pixel noise. Deterministic per
// (count, seed). Stands in for handwritten digits when no IDX files are
// available.
Dataset synthesize_digits(Eigen::Index count, uint64_t seed, Split split);

}  // namespace xbarnn
