#include "vortexflow/cache.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <unistd.h>

namespace vflow {

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

namespace {

constexpr char magic[8] = {'V', 'F', 'L', 'O', 'W', 'S', 'L', 'V'};

template <typename T>
void put(std::string& out, const T& v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

class Reader {
 public:
  Reader(const std::string& data, const std::string& path) : d_(data), path_(path) {}
  template <typename T>
  T get() {
    T v;
    take(&v, sizeof(T));
    return v;
  }
  void take(void* dst, size_t n) {
    if (pos_ + n > d_.size()) throw Error(ErrorCode::IoError, "truncated solver cache " + path_);
    std::memcpy(dst, d_.data() + pos_, n);
    pos_ += n;
  }
  size_t pos() const { return pos_; }

 private:
  const std::string& d_;
  std::string path_;
  size_t pos_ = 0;
};

struct Header {
  std::uint64_t domain_hash = 0;
  std::int32_t n = 0;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  return std::string(std::istreambuf_iterator<char>(in), {});
}

Header read_header(Reader& r, const std::string& path) {
  char m[8];
  r.take(m, 8);
  if (std::memcmp(m, magic, 8) != 0) throw Error(ErrorCode::IoError, path + " is not a solver cache");
  const auto version = r.get<std::uint32_t>();
  if (version != solver_cache_version)
    throw Error(ErrorCode::IoError, path + " has cache version " + std::to_string(version));
  Header h;
  h.domain_hash = r.get<std::uint64_t>();
  h.n = r.get<std::int32_t>();
  return h;
}

void verify_checksum(const std::string& data, const std::string& path) {
  if (data.size() < 8) throw Error(ErrorCode::IoError, "truncated solver cache " + path);
  std::uint64_t stored;
  std::memcpy(&stored, data.data() + data.size() - 8, 8);
  if (fnv1a(std::string_view(data).substr(0, data.size() - 8)) != stored)
    throw Error(ErrorCode::IoError, "checksum mismatch in solver cache " + path);
}

}  // namespace

void save_solver(const std::string& path, const PotentialSolver& S) {
  const auto& ls = S.boundary_solver();
  const Eigen::MatrixXd& lu = ls.lu();
  const Eigen::VectorXi& perm = ls.permutation();
  std::string out;
  out.append(magic, 8);
  put(out, solver_cache_version);
  put(out, S.domain().hash());
  put(out, std::int32_t(S.resolution()));
  put(out, std::int64_t(lu.rows()));
  put(out, std::int64_t(lu.cols()));
  out.append(reinterpret_cast<const char*>(lu.data()), sizeof(double) * size_t(lu.size()));
  for (Eigen::Index i = 0; i < perm.size(); ++i) put(out, std::int32_t(perm(i)));
  put(out, S.condition_estimate());
  put(out, fnv1a(out));

  const std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::IoError, "cannot write " + tmp);
    f.write(out.data(), std::streamsize(out.size()));
    if (!f) throw Error(ErrorCode::IoError, "write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error(ErrorCode::IoError, "cannot rename cache into " + path + ": " + ec.message());
  }
}

bool solver_cache_matches(const std::string& path, const Domain& d, int n) {
  const std::string data = slurp(path);
  if (data.empty()) return false;
  try {
    verify_checksum(data, path);
    Reader r(data, path);
    const Header h = read_header(r, path);
    return h.domain_hash == d.hash() && h.n == n;
  } catch (const Error&) {
    return false;
  }
}

SolverPtr load_solver(const std::string& path, const Domain& d, int n) {
  const std::string data = slurp(path);
  if (data.empty()) return nullptr;
  verify_checksum(data, path);
  Reader r(data, path);
  const Header h = read_header(r, path);
  if (h.domain_hash != d.hash() || h.n != n) return nullptr;
  const auto rows = r.get<std::int64_t>(), cols = r.get<std::int64_t>();
  if (rows <= 0 || rows != cols || rows > 1'000'000)
    throw Error(ErrorCode::IoError, "bad matrix size in solver cache " + path);
  Eigen::MatrixXd lu(rows, cols);
  r.take(lu.data(), sizeof(double) * size_t(lu.size()));
  Eigen::VectorXi perm(rows);
  for (Eigen::Index i = 0; i < rows; ++i) perm(i) = r.get<std::int32_t>();
  const double inv_rcond = r.get<double>();
  if (r.pos() + 8 != data.size()) throw Error(ErrorCode::IoError, "trailing bytes in solver cache " + path);
  return PotentialSolver::from_factors(d, n, std::move(lu), std::move(perm), inv_rcond);
}

}  // namespace vflow
