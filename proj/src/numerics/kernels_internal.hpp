#pragma once

#include "seq2rdf/numerics/kernels.hpp"

namespace seq2rdf::simd::detail {

#if defined(SEQ2RDF_HAVE_AVX2)
const KernelTable& avx2_table();
#endif

}  // namespace seq2rdf::simd::detail
