#pragma once

#include <cstddef>
#include <cstdlib>
#include <new>
#include <vector>

namespace sellkit {

/// Widest SIMD width we lay data out for.
inline constexpr std::size_t data_alignment = 64;

template <class T, std::size_t Align = data_alignment>
struct AlignedAlloc {
    using value_type = T;
    template <class U>
    struct rebind {
        using other = AlignedAlloc<U, Align>;
    };

    AlignedAlloc() = default;
    template <class U>
    AlignedAlloc(const AlignedAlloc<U, Align>&) noexcept {}

    T* allocate(std::size_t n) {
        if (n == 0) return nullptr;
        void* p = ::operator new(n * sizeof(T), std::align_val_t(Align));
        return static_cast<T*>(p);
    }
    void deallocate(T* p, std::size_t) noexcept {
        ::operator delete(p, std::align_val_t(Align));
    }

    template <class U>
    bool operator==(const AlignedAlloc<U, Align>&) const noexcept {
        return true;
    }
};

template <class T>
using avector = std::vector<T, AlignedAlloc<T>>;

} // namespace sellkit
