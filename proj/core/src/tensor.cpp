#include "misa/tensor.hpp"

#include "misa/error.hpp"

#include <mutex>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace misa {

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
    if (!same_shape(a, b))
        throw dimension_error(std::string(what) + ": shape mismatch " + shape_string(a) +
                              " vs " + shape_string(b));
}

bool all_finite(const Matrix& m) {
    return m.allFinite();
}

bool is_binary(const Matrix& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        const double v = m.data()[i];
        if (v != 0.0 && v != 1.0) return false;
    }
    return true;
}

void keep_heap_resident() {
#if defined(__GLIBC__)
    static std::once_flag once;
    std::call_once(once, [] {
        mallopt(M_MMAP_THRESHOLD, 256 << 20);
        mallopt(M_TRIM_THRESHOLD, 256 << 20);
        mallopt(M_TOP_PAD, 64 << 20);
    });
#endif
}

} // namespace misa
