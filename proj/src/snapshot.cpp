#include "acns/snapshot.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "snapshot format assumes a little-endian host");

namespace acns {

namespace {

constexpr uint32_t kStateVersion = 1;
constexpr uint32_t kIncrVersion = 1;

template <typename T>
void put(std::ofstream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw std::runtime_error("snapshot: truncated file");
    return v;
}

void put_array(std::ofstream& out, const std::vector<double>& v) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void get_array(std::ifstream& in, std::vector<double>& v) {
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (!in) throw std::runtime_error("snapshot: truncated coefficient block");
}

}  // namespace

void write_state_snapshot(const std::string& path, const FieldState& state) {
    const SpectralBasis& b = *state.phi.basis;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out.write("ACNS", 4);
    put<uint32_t>(out, kStateVersion);
    uint32_t flags = 0;
    bool has_velocity = !state.u.coeff.empty();
    if (has_velocity) flags |= 1u;
    if (b.boundary() == BoundaryMode::neumann_cosine) flags |= 2u;
    put<uint32_t>(out, flags);
    put<uint32_t>(out, static_cast<uint32_t>(b.grid_n()));
    put<double>(out, b.length());
    put<double>(out, b.dealias_fraction());
    put<double>(out, state.t);
    put<double>(out, state.lambda);
    put<uint64_t>(out, state.u.coeff.size());
    put<uint64_t>(out, state.phi.coeff.size());
    put_array(out, state.u.coeff);
    put_array(out, state.phi.coeff);
    put_array(out, state.mu.coeff);
    if (!out) throw std::runtime_error("snapshot: write failed for " + path);
}

FieldState read_state_snapshot(const std::string& path, const System& sys) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "ACNS", 4) != 0)
        throw std::runtime_error("snapshot: bad magic in " + path);
    if (get<uint32_t>(in) != kStateVersion)
        throw std::runtime_error("snapshot: unsupported version in " + path);
    uint32_t flags = get<uint32_t>(in);
    uint32_t n = get<uint32_t>(in);
    double length = get<double>(in);
    double dealias = get<double>(in);

    const SpectralBasis& b = *sys.basis;
    bool neumann = (flags & 2u) != 0;
    if (static_cast<int>(n) != b.grid_n() || std::fabs(length - b.length()) > 1e-12 ||
        std::fabs(dealias - b.dealias_fraction()) > 1e-12 ||
        neumann != (b.boundary() == BoundaryMode::neumann_cosine))
        throw std::runtime_error("snapshot: header does not match the configured basis");

    FieldState st;
    st.t = get<double>(in);
    st.lambda = get<double>(in);
    uint64_t n_vel = get<uint64_t>(in);
    uint64_t n_sc = get<uint64_t>(in);
    if (n_vel != b.n_vector() || n_sc != b.n_scalar())
        throw std::runtime_error("snapshot: coefficient counts do not match the basis");
    st.u = VectorField(sys.basis);
    st.phi = ScalarField(sys.basis);
    st.mu = ScalarField(sys.basis);
    get_array(in, st.u.coeff);
    get_array(in, st.phi.coeff);
    get_array(in, st.mu.coeff);
    return st;
}

void write_increments(const std::string& path,
                      const std::vector<WienerIncrement>& increments) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out.write("ACNW", 4);
    put<uint32_t>(out, kIncrVersion);
    uint32_t k1 = increments.empty() ? 0 : static_cast<uint32_t>(increments[0].dw1.size());
    uint32_t k2 = increments.empty() ? 0 : static_cast<uint32_t>(increments[0].dw2.size());
    put<uint32_t>(out, k1);
    put<uint32_t>(out, k2);
    put<uint64_t>(out, increments.size());
    put<double>(out, increments.empty() ? 0.0 : increments[0].dt);
    for (const auto& w : increments) {
        put_array(out, w.dw1);
        put_array(out, w.dw2);
    }
    if (!out) throw std::runtime_error("snapshot: write failed for " + path);
}

std::vector<WienerIncrement> read_increments(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "ACNW", 4) != 0)
        throw std::runtime_error("increments: bad magic in " + path);
    if (get<uint32_t>(in) != kIncrVersion)
        throw std::runtime_error("increments: unsupported version");
    uint32_t k1 = get<uint32_t>(in);
    uint32_t k2 = get<uint32_t>(in);
    uint64_t n = get<uint64_t>(in);
    double dt = get<double>(in);
    std::vector<WienerIncrement> out(n);
    for (auto& w : out) {
        w.dt = dt;
        w.dw1.resize(k1);
        w.dw2.resize(k2);
        get_array(in, w.dw1);
        get_array(in, w.dw2);
    }
    return out;
}

}  // namespace acns
