#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <exception>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace anisofrac {

/// Base of every library error.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parameter or precondition violation detected by the library.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Malformed configuration document or input file.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Quadrature, FFT or iteration breakdown.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Exponent regime in which only the trivial solution exists.
class RegimeError : public Error {
public:
    using Error::Error;
};

using Point = std::vector<double>;
using ScalarFn = std::function<double(std::span<const double>)>;

enum class Normalization { Probabilistic, Plain };

inline const char* to_string(Normalization n) {
    return n == Normalization::Probabilistic ? "probabilistic" : "plain";
}

struct FractionalParams {
    int dim = 2;
    double s = 0.5;
    double p = 3.0;
    Normalization normalization = Normalization::Probabilistic;

    void validate() const {
        if (dim < 1) throw DomainError("dim must be >= 1");
        if (!(s > 0.0 && s < 1.0)) throw DomainError("s must lie in (0,1)");
        if (!(p > 1.0) || !std::isfinite(p)) throw DomainError("p must be > 1");
    }

    /// Critical exponent N/(N-2s); +inf when 2s >= N.
    [[nodiscard]] double serrin_exponent() const {
        const double d = dim - 2.0 * s;
        return d > 0.0 ? dim / d : std::numeric_limits<double>::infinity();
    }

    /// Scaling exponent 2s/(p-1) of the solution family.
    [[nodiscard]] double scaling_exponent() const { return 2.0 * s / (p - 1.0); }
};

/// Uniform tensor grid on [-L, L)^N, node at -L and none at +L.
class Grid {
public:
    Grid() = default;

    Grid(std::vector<std::size_t> n, std::vector<double> extent)
        : n_(std::move(n)), extent_(std::move(extent)) {
        if (n_.empty() || n_.size() != extent_.size())
            throw DomainError("grid: axis count mismatch");
        for (std::size_t i = 0; i < n_.size(); ++i) {
            if (n_[i] < 4) throw DomainError("grid: n must be >= 4 on every axis");
            if (!std::isfinite(extent_[i]) || !(extent_[i] > 0.0))
                throw DomainError("grid: extent must be finite and positive");
        }
        strides_.assign(n_.size(), 1);
        for (std::size_t i = n_.size() - 1; i > 0; --i) strides_[i - 1] = strides_[i] * n_[i];
    }

    [[nodiscard]] int dim() const { return static_cast<int>(n_.size()); }
    [[nodiscard]] std::size_t n(int axis) const { return n_[axis]; }
    [[nodiscard]] double extent(int axis) const { return extent_[axis]; }
    [[nodiscard]] double spacing(int axis) const { return 2.0 * extent_[axis] / static_cast<double>(n_[axis]); }
    [[nodiscard]] const std::vector<std::size_t>& shape() const { return n_; }
    [[nodiscard]] const std::vector<double>& extents() const { return extent_; }
    [[nodiscard]] std::size_t stride(int axis) const { return strides_[axis]; }

    [[nodiscard]] std::size_t size() const {
        return std::accumulate(n_.begin(), n_.end(), std::size_t{1}, std::multiplies<>());
    }

    [[nodiscard]] double coord(int axis, std::size_t k) const {
        return -extent_[axis] + static_cast<double>(k) * spacing(axis);
    }

    /// Last node coordinate on an axis; interpolation is defined up to here.
    [[nodiscard]] double upper(int axis) const { return coord(axis, n_[axis] - 1); }

    [[nodiscard]] std::vector<std::size_t> unflatten(std::size_t flat) const {
        std::vector<std::size_t> idx(n_.size());
        for (std::size_t i = 0; i < n_.size(); ++i) {
            idx[i] = flat / strides_[i];
            flat %= strides_[i];
        }
        return idx;
    }

    [[nodiscard]] std::size_t flatten(std::span<const std::size_t> idx) const {
        std::size_t flat = 0;
        for (std::size_t i = 0; i < n_.size(); ++i) flat += idx[i] * strides_[i];
        return flat;
    }

    [[nodiscard]] Point point(std::size_t flat) const {
        Point x(n_.size());
        for (std::size_t i = 0; i < n_.size(); ++i) {
            x[i] = coord(static_cast<int>(i), flat / strides_[i]);
            flat %= strides_[i];
        }
        return x;
    }

    [[nodiscard]] double cell_volume() const {
        double v = 1.0;
        for (int i = 0; i < dim(); ++i) v *= spacing(i);
        return v;
    }

    /// True when x lies inside the interpolation box [-L, upper] on every axis.
    [[nodiscard]] bool contains(std::span<const double> x, double slack = 1e-12) const {
        for (int i = 0; i < dim(); ++i) {
            const double h = spacing(i);
            if (x[i] < -extent_[i] - slack * h || x[i] > upper(i) + slack * h) return false;
        }
        return true;
    }

    bool operator==(const Grid& o) const { return n_ == o.n_ && extent_ == o.extent_; }

private:
    std::vector<std::size_t> n_;
    std::vector<double> extent_;
    std::vector<std::size_t> strides_;
};

inline Grid make_grid(int dim, std::size_t n, double extent) {
    if (dim < 1) throw DomainError("grid: dim must be >= 1");
    if (n < 4) throw DomainError("grid: n must be >= 4");
    if (!std::isfinite(extent) || !(extent > 0.0)) throw DomainError("grid: extent must be finite and positive");
    return Grid(std::vector<std::size_t>(dim, n), std::vector<double>(dim, extent));
}

/// Sampled real function, row-major with axis 1 slowest.
class Field {
public:
    Field() = default;
    explicit Field(Grid g) : grid_(std::move(g)), values_(grid_.size(), 0.0) {}
    Field(Grid g, std::vector<double> v) : grid_(std::move(g)), values_(std::move(v)) {
        if (values_.size() != grid_.size()) throw DomainError("field: value count does not match grid");
    }

    [[nodiscard]] const Grid& grid() const { return grid_; }
    [[nodiscard]] std::span<const double> values() const { return values_; }
    [[nodiscard]] std::span<double> values() { return values_; }
    [[nodiscard]] std::size_t size() const { return values_.size(); }
    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }

    [[nodiscard]] double max() const { return *std::max_element(values_.begin(), values_.end()); }
    [[nodiscard]] double max_abs() const {
        double m = 0.0;
        for (double v : values_) m = std::max(m, std::abs(v));
        return m;
    }
    [[nodiscard]] std::size_t argmax() const {
        return static_cast<std::size_t>(std::max_element(values_.begin(), values_.end()) - values_.begin());
    }
    [[nodiscard]] bool all_finite() const {
        return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
    }

    /// Multilinear interpolation; x must satisfy grid().contains(x).
    [[nodiscard]] double interpolate(std::span<const double> x) const {
        const int d = grid_.dim();
        std::array<std::size_t, 8> base{};
        std::array<double, 8> frac{};
        if (d > 8) throw DomainError("interpolate: dim > 8 unsupported");
        std::size_t flat0 = 0;
        for (int i = 0; i < d; ++i) {
            const double h = grid_.spacing(i);
            double u = (x[i] + grid_.extent(i)) / h;
            const auto nmax = static_cast<double>(grid_.n(i) - 1);
            u = std::clamp(u, 0.0, nmax);
            auto k = static_cast<std::size_t>(std::floor(u));
            if (k >= grid_.n(i) - 1) k = grid_.n(i) - 2;
            base[i] = k;
            frac[i] = u - static_cast<double>(k);
            flat0 += k * grid_.stride(i);
        }
        double acc = 0.0;
        const std::size_t corners = std::size_t{1} << d;
        for (std::size_t c = 0; c < corners; ++c) {
            double w = 1.0;
            std::size_t flat = flat0;
            for (int i = 0; i < d; ++i) {
                if (c & (std::size_t{1} << i)) {
                    w *= frac[i];
                    flat += grid_.stride(i);
                } else {
                    w *= 1.0 - frac[i];
                }
            }
            if (w != 0.0) acc += w * values_[flat];
        }
        return acc;
    }

private:
    Grid grid_;
    std::vector<double> values_;
};

inline Field sample_function(const ScalarFn& f, const Grid& grid) {
    Field out(grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const Point x = grid.point(k);
        const double v = f(x);
        if (!std::isfinite(v)) throw NumericalError("sample_function: non-finite value at node " + std::to_string(k));
        out[k] = v;
    }
    return out;
}

/// Hyperplane through which points are reflected.
struct Hyperplane {
    enum class Kind { Axis, Diagonal };
    Kind kind = Kind::Axis;
    int i = 0;
    int j = 1;
    int sign = 1;
    double offset = 0.0;

    static Hyperplane axis(int i, double lambda) { return {Kind::Axis, i, i, 1, lambda}; }
    static Hyperplane diagonal(int i, int j, int sign, double lambda) {
        if (i == j) throw DomainError("diagonal plane needs two distinct axes");
        return {Kind::Diagonal, i, j, sign >= 0 ? 1 : -1, lambda};
    }

    [[nodiscard]] Hyperplane with_offset(double lambda) const {
        Hyperplane h = *this;
        h.offset = lambda;
        return h;
    }

    /// Signed distance; negative on the side the moving-plane region starts from.
    [[nodiscard]] double signed_distance(std::span<const double> x) const {
        if (kind == Kind::Axis) return x[i] - offset;
        return (x[i] + sign * x[j] - offset) / std::sqrt(2.0);
    }

    /// Offset of the parallel plane through point c.
    [[nodiscard]] double offset_through(std::span<const double> c) const {
        return kind == Kind::Axis ? c[i] : c[i] + sign * c[j];
    }

    [[nodiscard]] std::string label() const {
        std::ostringstream os;
        if (kind == Kind::Axis) {
            os << "axis(" << i + 1 << ")";
        } else {
            os << "diagonal(" << i + 1 << "," << j + 1 << "," << (sign > 0 ? '+' : '-') << ")";
        }
        return os.str();
    }
};

inline void reflect_in_place(std::span<double> x, const Hyperplane& plane) {
    const double lam = plane.offset;
    if (plane.kind == Hyperplane::Kind::Axis) {
        x[plane.i] = 2.0 * lam - x[plane.i];
        return;
    }
    const double xi = x[plane.i];
    const double xj = x[plane.j];
    if (plane.sign > 0) {
        x[plane.i] = lam - xj;
        x[plane.j] = lam - xi;
    } else {
        x[plane.i] = xj + lam;
        x[plane.j] = xi - lam;
    }
}

inline Point reflect_point(std::span<const double> x, const Hyperplane& plane) {
    Point y(x.begin(), x.end());
    reflect_in_place(y, plane);
    return y;
}

/// Field viewed as a function on R^N, extended past the box by a power-law decay model.
inline ScalarFn field_function(const Field& f, double decay_exponent) {
    return [&f, decay_exponent](std::span<const double> x) {
        const Grid& g = f.grid();
        if (g.contains(x)) return f.interpolate(x);
        Point c(x.begin(), x.end());
        double r_out = 0.0;
        double r_in = 0.0;
        for (int i = 0; i < g.dim(); ++i) {
            c[i] = std::clamp(x[i], -g.extent(i), g.upper(i));
            r_out += x[i] * x[i];
            r_in += c[i] * c[i];
        }
        const double v = f.interpolate(c);
        if (r_in <= 0.0) return v;
        return v * std::pow(std::sqrt(r_out / r_in), -decay_exponent);
    };
}

// ---------------------------------------------------------------------------
// Worker-count control shared by the parallel loops of the library.

inline unsigned& thread_cap_storage() {
    static unsigned cap = 0;
    return cap;
}

inline void set_thread_count(unsigned n) { thread_cap_storage() = n; }

inline unsigned thread_count() {
    const unsigned cap = thread_cap_storage();
    if (cap > 0) return cap;
    return std::max(1u, std::thread::hardware_concurrency());
}

inline bool& inside_parallel_region() {
    thread_local bool flag = false;
    return flag;
}

/// Runs body(k) for k in [0, n) over contiguous chunks; results must not depend on chunking.
/// Calls made from inside a worker run serially.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(thread_count(), n));
    if (workers <= 1 || inside_parallel_region()) {
        for (std::size_t k = 0; k < n; ++k) body(k);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            inside_parallel_region() = true;
            try {
                const std::size_t lo = w * chunk;
                const std::size_t hi = std::min(n, lo + chunk);
                for (std::size_t k = lo; k < hi; ++k) body(k);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

// ---------------------------------------------------------------------------
// Binary field format: "AFLT", u32 version, u32 dim, per axis (u32 n, f64 extent), f64 values.

namespace detail {

template <class T>
void put_le(std::ostream& os, T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
    unsigned char buf[sizeof(T)];
    if (!is.read(reinterpret_cast<char*>(buf), sizeof(T))) throw ConfigError("truncated field file");
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
}

}  // namespace detail

inline constexpr std::uint32_t kFieldFormatVersion = 1;

inline void write_field(std::ostream& os, const Field& f) {
    os.write("AFLT", 4);
    detail::put_le<std::uint32_t>(os, kFieldFormatVersion);
    const Grid& g = f.grid();
    detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(g.dim()));
    for (int i = 0; i < g.dim(); ++i) {
        detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(g.n(i)));
        detail::put_le<double>(os, g.extent(i));
    }
    for (double v : f.values()) detail::put_le<double>(os, v);
}

inline void write_field(const std::string& path, const Field& f) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot open for writing: " + path);
    write_field(os, f);
}

inline Field read_field(std::istream& is) {
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, "AFLT", 4) != 0) throw ConfigError("bad magic");
    const auto version = detail::get_le<std::uint32_t>(is);
    if (version != kFieldFormatVersion) throw ConfigError("unsupported field version " + std::to_string(version));
    const auto dim = detail::get_le<std::uint32_t>(is);
    if (dim < 1 || dim > 8) throw ConfigError("bad dimension in field file");
    std::vector<std::size_t> n(dim);
    std::vector<double> ext(dim);
    for (std::uint32_t i = 0; i < dim; ++i) {
        n[i] = detail::get_le<std::uint32_t>(is);
        ext[i] = detail::get_le<double>(is);
    }
    Grid g = [&] {
        try {
            return Grid(n, ext);
        } catch (const DomainError& e) {
            throw ConfigError(std::string("bad grid in field file: ") + e.what());
        }
    }();
    std::vector<double> vals(g.size());
    for (auto& v : vals) v = detail::get_le<double>(is);
    return Field(std::move(g), std::move(vals));
}

inline Field read_field(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open field file: " + path);
    return read_field(is);
}

inline void write_csv(std::ostream& os, const Field& f) {
    const Grid& g = f.grid();
    for (int i = 0; i < g.dim(); ++i) os << 'x' << i + 1 << ',';
    os << "value\n";
    os << std::setprecision(17);
    for (std::size_t k = 0; k < f.size(); ++k) {
        const Point x = g.point(k);
        for (double c : x) os << c << ',';
        os << f[k] << '\n';
    }
}

inline void write_csv(const std::string& path, const Field& f) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open for writing: " + path);
    write_csv(os, f);
}

}  // namespace anisofrac
