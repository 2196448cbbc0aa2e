#include "toeplab/error.hpp"
#include "toeplab/operator.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <vector>

namespace toeplab {

namespace {

constexpr char kMagic[4] = {'T', 'M', 'L', 'B'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::vector<char>& buf, T v) {
    char raw[sizeof(T)];
    std::memcpy(raw, &v, sizeof(T));
    buf.insert(buf.end(), raw, raw + sizeof(T));
}

template <class T>
T get(const char* p) {
    T v;
    std::memcpy(&v, p, sizeof(T));
    return v;
}

}  // namespace

void export_binary(const OperatorMatrix& M, const std::string& path) {
    std::vector<char> buf(kMagic, kMagic + 4);
    put<std::uint32_t>(buf, kVersion);
    put<std::uint32_t>(buf, M.space().is_half_line() ? 0u : 1u);
    put<std::uint32_t>(buf, static_cast<std::uint32_t>(M.space().d));
    put<std::uint64_t>(buf, static_cast<std::uint64_t>(M.space().N));
    put<std::uint64_t>(buf, static_cast<std::uint64_t>(M.dim()));
    const Matrix& D = M.data();
    for (long c = 0; c < D.cols(); ++c)
        for (long r = 0; r < D.rows(); ++r) {
            put<double>(buf, D(r, c).real());
            put<double>(buf, D(r, c).imag());
        }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path + " for writing");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

OperatorMatrix import_binary(const std::string& path, const std::string& label) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (buf.size() < 32 || std::memcmp(buf.data(), kMagic, 4) != 0) throw Error(path + ": not a TMLB file");
    if (get<std::uint32_t>(buf.data() + 4) != kVersion) throw Error(path + ": unsupported version");
    const auto tag = get<std::uint32_t>(buf.data() + 8);
    const auto d = get<std::uint32_t>(buf.data() + 12);
    const auto N = get<std::uint64_t>(buf.data() + 16);
    const auto dim = get<std::uint64_t>(buf.data() + 24);
    Space sp = tag == 0 ? Space::half_line(int(N)) : Space::lattice(int(d), int(N));
    if (static_cast<std::uint64_t>(sp.dim()) != dim || buf.size() != 32 + dim * dim * 16)
        throw Error(path + ": size mismatch");
    Matrix D(dim, dim);
    const char* p = buf.data() + 32;
    for (std::uint64_t c = 0; c < dim; ++c)
        for (std::uint64_t r = 0; r < dim; ++r, p += 16) D(r, c) = cplx(get<double>(p), get<double>(p + 8));
    return {sp, std::move(D), label};
}

void export_csv(const OperatorMatrix& M, const std::string& path, double threshold) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << "row,col,re,im\n";
    char line[128];
    const Matrix& D = M.data();
    for (long r = 0; r < D.rows(); ++r)
        for (long c = 0; c < D.cols(); ++c)
            if (std::abs(D(r, c)) > threshold) {
                std::snprintf(line, sizeof line, "%ld,%ld,%.17g,%.17g\n", r, c, D(r, c).real(), D(r, c).imag());
                out << line;
            }
}

}  // namespace toeplab
