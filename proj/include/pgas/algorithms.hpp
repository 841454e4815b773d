#ifndef PGAS_ALGORITHMS_HPP
#define PGAS_ALGORITHMS_HPP

#include <algorithm>
#include <optional>

#include "pgas/global_iterator.hpp"

namespace pgas {

// Collective iterator-range algorithms. Every unit holding data in the range
// participates; each operates on the elements it owns, then partial results
// combine through the runtime collectives in rank order. Units owning no
// element of a range still take part in the combine step. copy/copy_async
// are the exception: they are one-sided, single-caller operations.

namespace detail {

template <TriviallyCopyable T>
struct RangeParts {
  GlobalMemory<T>* mem;
  const Pattern* pattern;
  Team* team;
  std::uint64_t first;
  std::uint64_t last;
};

template <TriviallyCopyable T>
RangeParts<T> split_range(const GlobalIterator<T>& first, const GlobalIterator<T>& last) {
  if (first.memory() == nullptr || first.memory() != last.memory() ||
      first.pattern() != last.pattern())
    throw usage_error("range iterators must come from the same container");
  if (first.index() > last.index()) throw usage_error("inverted iterator range");
  return {first.memory(), first.pattern(), &first.memory()->team(), first.index(),
          last.index()};
}

/// Applies fn(local_ptr, global_start_index, length) to every maximal
/// owned run inside [first, last), ascending global order.
template <TriviallyCopyable T, typename Fn>
void for_each_owned_run(const RangeParts<T>& r, Fn&& fn) {
  const std::uint32_t rank = r.team->my_id().value;
  if (r.pattern->ndim() == 1) {
    r.pattern->for_each_local_run(rank, r.first, r.last, [&](Pattern::Run run) {
      fn(r.mem->local_data() + run.local_offset, run.global_begin, run.length);
    });
    return;
  }
  const std::uint64_t local_n = r.mem->local_count();
  for (std::uint64_t l = 0; l < local_n; ++l) {
    std::uint64_t g = r.pattern->linear_of_local(rank, l);
    if (g >= r.first && g < r.last) fn(r.mem->local_data() + l, g, 1);
  }
}

template <typename T>
std::uint64_t value_hash(std::uint64_t kind, const T& v) {
  std::uint64_t h = fnv1a_u64(kind);
  return fnv1a(ConstByteSpan{reinterpret_cast<const std::byte*>(&v), sizeof(T)}, h);
}

template <typename P>
struct Partial {
  P value;
  std::uint8_t valid;
};

}  // namespace detail

template <TriviallyCopyable T>
void fill(GlobalIterator<T> first, GlobalIterator<T> last, const T& value) {
  auto r = detail::split_range(first, last);
  if (r.mem->rt().debug_checks())
    r.mem->rt().consistency_check(*r.team, detail::value_hash(0x46494C4C, value));
  detail::for_each_owned_run(r, [&](T* p, std::uint64_t, std::uint64_t len) {
    std::fill_n(p, len, value);
  });
  r.team->barrier();
}

/// element at global index i = f(i)
template <TriviallyCopyable T, typename F>
void generate(GlobalIterator<T> first, GlobalIterator<T> last, F f) {
  auto r = detail::split_range(first, last);
  if (r.mem->rt().debug_checks())
    r.mem->rt().consistency_check(*r.team, fnv1a_u64(0x47454E52));
  detail::for_each_owned_run(r, [&](T* p, std::uint64_t g, std::uint64_t len) {
    for (std::uint64_t i = 0; i < len; ++i) p[i] = f(g + i);
  });
  r.team->barrier();
}

/// f applied exactly once per element, on the unit that owns it.
template <TriviallyCopyable T, typename F>
void for_each(GlobalIterator<T> first, GlobalIterator<T> last, F f) {
  auto r = detail::split_range(first, last);
  if (r.mem->rt().debug_checks())
    r.mem->rt().consistency_check(*r.team, fnv1a_u64(0x46454348));
  detail::for_each_owned_run(r, [&](T* p, std::uint64_t, std::uint64_t len) {
    for (std::uint64_t i = 0; i < len; ++i) f(p[i]);
  });
  r.team->barrier();
}

/// out_i = f(in_i); each unit computes the outputs it owns, fetching
/// non-local inputs with one-sided gets.
template <TriviallyCopyable T, TriviallyCopyable U, typename F>
void transform(GlobalIterator<T> in_first, GlobalIterator<T> in_last,
               GlobalIterator<U> out_first, F f) {
  auto in = detail::split_range(in_first, in_last);
  const std::uint64_t n = in.last - in.first;
  GlobalIterator<U> out_last = out_first + static_cast<std::int64_t>(n);
  auto out = detail::split_range(out_first, out_last);
  if (out.last > out.pattern->size()) throw usage_error("output range too short");
  if (out.mem->rt().debug_checks())
    out.mem->rt().consistency_check(*out.team, fnv1a_u64(0x5846524D));

  std::vector<T> staging;
  detail::for_each_owned_run(out, [&](U* p, std::uint64_t g_out, std::uint64_t len) {
    staging.resize(len);
    std::uint64_t g_in = in.first + (g_out - out.first);
    get_block_async(in_first + static_cast<std::int64_t>(g_in - in.first),
                    in_first + static_cast<std::int64_t>(g_in - in.first + len),
                    std::span<T>(staging))
        .wait();
    for (std::uint64_t i = 0; i < len; ++i) p[i] = f(staging[i]);
  });
  out.team->barrier();
}

/// Deterministic: local folds in ascending global order, partials combined
/// in rank order, result broadcast to every unit.
template <TriviallyCopyable T, typename Op>
T accumulate(GlobalIterator<T> first, GlobalIterator<T> last, T init, Op op) {
  auto r = detail::split_range(first, last);
  using Part = detail::Partial<T>;
  Part mine{};
  mine.valid = 0;
  detail::for_each_owned_run(r, [&](T* p, std::uint64_t, std::uint64_t len) {
    for (std::uint64_t i = 0; i < len; ++i) {
      if (!mine.valid) {
        mine.value = p[i];
        mine.valid = 1;
      } else {
        mine.value = op(mine.value, p[i]);
      }
    }
  });
  Part total = r.team->all_reduce(mine, [&op](Part a, Part b) {
    if (!a.valid) return b;
    if (!b.valid) return a;
    return Part{op(a.value, b.value), 1};
  });
  return total.valid ? op(init, total.value) : init;
}

template <TriviallyCopyable T>
T accumulate(GlobalIterator<T> first, GlobalIterator<T> last, T init) {
  return accumulate(first, last, init, [](const T& a, const T& b) { return a + b; });
}

namespace detail {

template <TriviallyCopyable T, typename Better>
GlobalIterator<T> extremum_element(GlobalIterator<T> first, GlobalIterator<T> last,
                                   Better better, std::uint64_t kind) {
  auto r = split_range(first, last);
  if (r.mem->rt().debug_checks())
    r.mem->rt().consistency_check(*r.team, fnv1a_u64(kind));
  struct Candidate {
    T value;
    std::uint64_t index;
  };
  Partial<Candidate> mine{};
  mine.valid = 0;
  for_each_owned_run(r, [&](T* p, std::uint64_t g, std::uint64_t len) {
    const T* best = std::min_element(p, p + len, better);  // first occurrence wins
    Candidate c{*best, g + static_cast<std::uint64_t>(best - p)};
    if (!mine.valid || better(c.value, mine.value.value)) {
      mine.value = c;
      mine.valid = 1;
    }
  });
  using Part = Partial<Candidate>;
  Part total = r.team->all_reduce(mine, [&better](Part a, Part b) {
    if (!a.valid) return b;
    if (!b.valid) return a;
    if (better(b.value.value, a.value.value)) return b;
    if (better(a.value.value, b.value.value)) return a;
    return a.value.index <= b.value.index ? a : b;  // ties: smallest global index
  });
  if (!total.valid) return last;
  return first + static_cast<std::int64_t>(total.value.index - r.first);
}

}  // namespace detail

/// Iterator to the smallest element; ties break to the smallest global
/// index; empty range yields the end iterator. Identical on every unit.
template <TriviallyCopyable T>
GlobalIterator<T> min_element(GlobalIterator<T> first, GlobalIterator<T> last) {
  return detail::extremum_element(first, last,
                                  [](const T& a, const T& b) { return a < b; }, 0x4D494E45);
}

template <TriviallyCopyable T>
GlobalIterator<T> max_element(GlobalIterator<T> first, GlobalIterator<T> last) {
  return detail::extremum_element(first, last,
                                  [](const T& a, const T& b) { return b < a; }, 0x4D415845);
}

/// First match in global index order, or the end iterator.
template <TriviallyCopyable T>
GlobalIterator<T> find(GlobalIterator<T> first, GlobalIterator<T> last, const T& value) {
  auto r = detail::split_range(first, last);
  if (r.mem->rt().debug_checks())
    r.mem->rt().consistency_check(*r.team, detail::value_hash(0x46494E44, value));
  std::uint64_t found = ~std::uint64_t{0};
  detail::for_each_owned_run(r, [&](T* p, std::uint64_t g, std::uint64_t len) {
    if (found != ~std::uint64_t{0}) return;  // runs ascend; first hit is ours
    for (std::uint64_t i = 0; i < len; ++i) {
      if (p[i] == value) {
        found = g + i;
        return;
      }
    }
  });
  std::uint64_t best = r.team->all_reduce(
      found, [](std::uint64_t a, std::uint64_t b) { return a < b ? a : b; });
  if (best == ~std::uint64_t{0}) return last;
  return first + static_cast<std::int64_t>(best - r.first);
}

template <TriviallyCopyable T, typename Pred>
bool all_of(GlobalIterator<T> first, GlobalIterator<T> last, Pred pred) {
  auto r = detail::split_range(first, last);
  if (r.mem->rt().debug_checks())
    r.mem->rt().consistency_check(*r.team, fnv1a_u64(0x414C4C4F));
  std::uint8_t ok = 1;
  detail::for_each_owned_run(r, [&](T* p, std::uint64_t, std::uint64_t len) {
    for (std::uint64_t i = 0; i < len && ok; ++i) ok = pred(p[i]) ? 1 : 0;
  });
  return r.team->all_reduce(ok, [](std::uint8_t a, std::uint8_t b) {
           return static_cast<std::uint8_t>(a & b);
         }) != 0;
}

template <TriviallyCopyable T, typename Pred>
bool any_of(GlobalIterator<T> first, GlobalIterator<T> last, Pred pred) {
  auto r = detail::split_range(first, last);
  if (r.mem->rt().debug_checks())
    r.mem->rt().consistency_check(*r.team, fnv1a_u64(0x414E594F));
  std::uint8_t hit = 0;
  detail::for_each_owned_run(r, [&](T* p, std::uint64_t, std::uint64_t len) {
    for (std::uint64_t i = 0; i < len && !hit; ++i) hit = pred(p[i]) ? 1 : 0;
  });
  return r.team->all_reduce(hit, [](std::uint8_t a, std::uint8_t b) {
           return static_cast<std::uint8_t>(a | b);
         }) != 0;
}

template <TriviallyCopyable T, typename Pred>
bool none_of(GlobalIterator<T> first, GlobalIterator<T> last, Pred pred) {
  return !any_of(first, last, pred);
}

// -- copy: one-sided, single caller ------------------------------------------

template <TriviallyCopyable T>
AsyncHandle copy_async(GlobalIterator<T> first, GlobalIterator<T> last, T* out) {
  return get_block_async(first, last,
                         std::span<T>(out, static_cast<std::size_t>(last - first)));
}

template <TriviallyCopyable T>
AsyncHandle copy_async(const T* first, const T* last, GlobalIterator<T> out) {
  auto n = static_cast<std::int64_t>(last - first);
  return put_block_async(std::span<const T>(first, static_cast<std::size_t>(n)), out, out + n);
}

/// Gather a global range into a private buffer; returns one past the last
/// written element.
template <TriviallyCopyable T>
T* copy(GlobalIterator<T> first, GlobalIterator<T> last, T* out) {
  copy_async(first, last, out).wait();
  return out + (last - first);
}

/// Scatter a private buffer into a global range. Locally complete on return;
/// remotely visible after a flush or barrier.
template <TriviallyCopyable T>
GlobalIterator<T> copy(const T* first, const T* last, GlobalIterator<T> out) {
  copy_async(first, last, out).wait();
  return out + static_cast<std::int64_t>(last - first);
}

}  // namespace pgas

#endif  // PGAS_ALGORITHMS_HPP
