#include <cstdlib>
#include <string_view>

#include "kernels_impl.hpp"

namespace rhuidr::kernels {

const KernelTable* avx2_table() { return cpu_has_avx2() ? avx2_table_unchecked() : nullptr; }

std::vector<const KernelTable*> available() {
  std::vector<const KernelTable*> out{&scalar_table()};
  if (const KernelTable* t = avx2_table()) out.push_back(t);
  return out;
}

namespace {

const KernelTable& select() {
  const char* env = std::getenv("RHUIDR_KERNELS");
  const std::string_view want = env ? env : "";
  if (want == "scalar") return scalar_table();
  if (const KernelTable* t = avx2_table()) return *t;
  return scalar_table();
}

}  // namespace

const KernelTable& active() {
  static const KernelTable& table = select();
  return table;
}

}  // namespace rhuidr::kernels
