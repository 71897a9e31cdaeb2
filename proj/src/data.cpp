#include "xbarnn/data.hpp"

#include "xbarnn/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

namespace xbarnn {

namespace {

constexpr uint32_t kImageMagic = 0x00000803;
constexpr uint32_t kLabelMagic = 0x00000801;
constexpr Eigen::Index kSide = 28;
constexpr Eigen::Index kPixels = kSide * kSide;

uint32_t read_be32(std::istream& in, const std::string& path) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw ConfigError(path + ": truncated header");
    return (uint32_t(b[0]) << 24) | (uint32_t(b[1]) << 16) | (uint32_t(b[2]) << 8) |
           uint32_t(b[3]);
}

void write_be32(std::ostream& out, uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                                static_cast<unsigned char>(v >> 16),
                                static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace

Eigen::MatrixXd load_idx_images(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open image file: " + path);

    const uint32_t magic = read_be32(in, path);
    if (magic == kLabelMagic)
        throw ConfigError(path + ": label file passed as images (magic 0x00000801)");
    if (magic != kImageMagic)
        throw ConfigError(path + ": bad image magic, expected 0x00000803");

    const uint32_t count = read_be32(in, path);
    const uint32_t rows = read_be32(in, path);
    const uint32_t cols = read_be32(in, path);
    if (rows != kSide || cols != kSide)
        throw ConfigError(path + ": expected 28x28 images, got " + std::to_string(rows) +
                          "x" + std::to_string(cols));

    std::vector<unsigned char> buf(static_cast<size_t>(count) * kPixels);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (static_cast<size_t>(in.gcount()) != buf.size())
        throw ConfigError(path + ": truncated image payload");

    Eigen::MatrixXd images(count, kPixels);
    for (Eigen::Index i = 0; i < images.rows(); ++i)
        for (Eigen::Index p = 0; p < kPixels; ++p)
            images(i, p) = buf[static_cast<size_t>(i) * kPixels + p] / 255.0;
    return images;
}

std::vector<int> load_idx_labels(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open label file: " + path);

    const uint32_t magic = read_be32(in, path);
    if (magic == kImageMagic)
        throw ConfigError(path + ": image file passed as labels (magic 0x00000803)");
    if (magic != kLabelMagic)
        throw ConfigError(path + ": bad label magic, expected 0x00000801");

    const uint32_t count = read_be32(in, path);
    std::vector<unsigned char> buf(count);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (static_cast<size_t>(in.gcount()) != buf.size())
        throw ConfigError(path + ": truncated label payload");

    std::vector<int> labels(count);
    for (size_t i = 0; i < buf.size(); ++i) {
        if (buf[i] > 9)
            throw ConfigError(path + ": label value " + std::to_string(int(buf[i])) +
                              " out of range 0..9 at index " + std::to_string(i));
        labels[i] = buf[i];
    }
    return labels;
}

Dataset load_dataset(const std::string& images_path, const std::string& labels_path,
                     Split split) {
    Dataset ds;
    ds.images = load_idx_images(images_path);
    ds.labels = load_idx_labels(labels_path);
    ds.split = split;
    if (static_cast<size_t>(ds.images.rows()) != ds.labels.size())
        throw ConfigError("image count " + std::to_string(ds.images.rows()) +
                          " does not match label count " + std::to_string(ds.labels.size()));
    return ds;
}

void write_idx_images(const std::string& path, const Eigen::MatrixXd& images) {
    if (images.cols() != kPixels)
        throw ConfigError("write_idx_images: expected 784 columns");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write image file: " + path);
    write_be32(out, kImageMagic);
    write_be32(out, static_cast<uint32_t>(images.rows()));
    write_be32(out, kSide);
    write_be32(out, kSide);
    std::vector<unsigned char> buf(static_cast<size_t>(images.size()));
    for (Eigen::Index i = 0; i < images.rows(); ++i)
        for (Eigen::Index p = 0; p < kPixels; ++p)
            buf[static_cast<size_t>(i) * kPixels + p] = static_cast<unsigned char>(
                std::lround(std::clamp(images(i, p), 0.0, 1.0) * 255.0));
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size()));
}

void write_idx_labels(const std::string& path, const std::vector<int>& labels) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write label file: " + path);
    write_be32(out, kLabelMagic);
    write_be32(out, static_cast<uint32_t>(labels.size()));
    std::vector<unsigned char> buf(labels.size());
    for (size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] > 9)
            throw ConfigError("write_idx_labels: label out of range 0..9");
        buf[i] = static_cast<unsigned char>(labels[i]);
    }
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size()));
}

std::vector<std::vector<Eigen::Index>> batches(const Dataset& ds, Eigen::Index batch_size,
                                               uint64_t seed) {
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    std::vector<Eigen::Index> order(static_cast<size_t>(ds.count()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<std::vector<Eigen::Index>> out;
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(batch_size)) {
        const size_t stop = std::min(order.size(), start + static_cast<size_t>(batch_size));
        out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(stop));
    }
    return out;
}

namespace {

struct Segment {
    double x0, y0, x1, y1;
};

// Seven-segment strokes in a unit glyph box, y pointing down.
constexpr std::array<Segment, 7> kStrokes = {{
    {0.25, 0.18, 0.75, 0.18},  // top
    {0.75, 0.18, 0.75, 0.50},  // upper right
    {0.75, 0.50, 0.75, 0.82},  // lower right
    {0.25, 0.82, 0.75, 0.82},  // bottom
    {0.25, 0.50, 0.25, 0.82},  // lower left
    {0.25, 0.18, 0.25, 0.50},  // upper left
    {0.25, 0.50, 0.75, 0.50},  // middle
}};

constexpr std::array<uint8_t, 10> kDigitMask = {
    0b0111111,  // 0: all but middle
    0b0000110,  // 1
    0b1011011,  // 2
    0b1001111,  // 3
    0b1100110,  // 4
    0b1101101,  // 5
    0b1111101,  // 6
    0b0000111,  // 7
    0b1111111,  // 8
    0b1101111,  // 9
};

double point_segment_distance(double px, double py, const Segment& s) {
    const double dx = s.x1 - s.x0, dy = s.y1 - s.y0;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0.0 ? ((px - s.x0) * dx + (py - s.y0) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double cx = s.x0 + t * dx, cy = s.y0 + t * dy;
    return std::hypot(px - cx, py - cy);
}

}  // namespace

Dataset synthesize_digits(Eigen::Index count, uint64_t seed, Split split) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> label_dist(0, 9);
    std::uniform_real_distribution<double> rot_dist(-0.20, 0.20);
    std::uniform_real_distribution<double> scale_dist(0.75, 1.05);
    std::uniform_real_distribution<double> shear_dist(-0.12, 0.12);
    std::uniform_real_distribution<double> shift_dist(-2.5, 2.5);
    std::uniform_real_distribution<double> width_dist(1.0, 1.7);
    std::uniform_real_distribution<double> intensity_dist(0.75, 1.0);
    std::normal_distribution<double> noise_dist(0.0, 0.06);

    Dataset ds;
    ds.split = split;
    ds.images.resize(count, kPixels);
    ds.labels.resize(static_cast<size_t>(count));

    for (Eigen::Index n = 0; n < count; ++n) {
        const int label = label_dist(rng);
        ds.labels[static_cast<size_t>(n)] = label;

        const double theta = rot_dist(rng);
        const double sx = scale_dist(rng), sy = scale_dist(rng);
        const double shear = shear_dist(rng);
        const double tx = 14.0 + shift_dist(rng), ty = 14.0 + shift_dist(rng);
        const double half_width = width_dist(rng);
        const double intensity = intensity_dist(rng);
        const double c = std::cos(theta), s = std::sin(theta);

        // Glyph box to pixel coordinates; 22 px nominal glyph size.
        auto to_px = [&](double u, double v, double& x, double& y) {
            const double gx = (u - 0.5 + shear * (v - 0.5)) * sx * 22.0;
            const double gy = (v - 0.5) * sy * 22.0;
            x = c * gx - s * gy + tx;
            y = s * gx + c * gy + ty;
        };

        std::array<Segment, 7> strokes{};
        int active = 0;
        for (size_t k = 0; k < kStrokes.size(); ++k) {
            if (!(kDigitMask[static_cast<size_t>(label)] >> k & 1)) continue;
            Segment seg{};
            to_px(kStrokes[k].x0, kStrokes[k].y0, seg.x0, seg.y0);
            to_px(kStrokes[k].x1, kStrokes[k].y1, seg.x1, seg.y1);
            strokes[static_cast<size_t>(active++)] = seg;
        }

        for (Eigen::Index py = 0; py < kSide; ++py) {
            for (Eigen::Index px = 0; px < kSide; ++px) {
                double d = 1e9;
                for (int k = 0; k < active; ++k)
                    d = std::min(d, point_segment_distance(double(px), double(py),
                                                           strokes[static_cast<size_t>(k)]));
                // Soft-edged stroke plus pixel noise.
                double v = intensity *
                           std::clamp((half_width + 0.7 - d) / 1.4, 0.0, 1.0);
                v += noise_dist(rng);
                // Snap to the byte grid so IDX round trips are exact.
                const double byte = std::lround(std::clamp(v, 0.0, 1.0) * 255.0);
                ds.images(n, py * kSide + px) = byte / 255.0;
            }
        }
    }
    return ds;
}

}  // namespace xbarnn
