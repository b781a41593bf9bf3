#pragma once

#include "rhuidr/kernels.hpp"

namespace rhuidr::kernels {

bool cpu_has_avx2();
const KernelTable* avx2_table_unchecked();

}  // namespace rhuidr::kernels
