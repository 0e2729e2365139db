#pragma once

#include <cmath>
#include <cstdio>

inline int g_checks = 0;
inline int g_failures = 0;

#define CHECK(cond)                                                  \
  do {                                                               \
    ++g_checks;                                                      \
    if (!(cond)) {                                                   \
      ++g_failures;                                                  \
      std::printf("[FAIL] %s:%d  %s\n", __FILE__, __LINE__, #cond);  \
    }                                                                \
  } while (0)

#define CHECK_NEAR(a, b, tol)                                                              \
  do {                                                                                     \
    ++g_checks;                                                                            \
    const double check_va = (a), check_vb = (b);                                           \
    if (!(std::abs(check_va - check_vb) <= (tol))) {                                       \
      ++g_failures;                                                                        \
      std::printf("[FAIL] %s:%d  %s=%.12g vs %s=%.12g (tol %g)\n", __FILE__, __LINE__, #a, \
                  check_va, #b, check_vb, static_cast<double>(tol));                       \
    }                                                                                      \
  } while (0)

#define CHECK_THROWS(expr, extype)                                                      \
  do {                                                                                  \
    ++g_checks;                                                                         \
    bool check_thrown = false;                                                          \
    try {                                                                               \
      (void)(expr);                                                                     \
    } catch (const extype&) {                                                           \
      check_thrown = true;                                                              \
    } catch (...) {                                                                     \
    }                                                                                   \
    if (!check_thrown) {                                                                \
      ++g_failures;                                                                     \
      std::printf("[FAIL] %s:%d  expected %s from %s\n", __FILE__, __LINE__, #extype,   \
                  #expr);                                                               \
    }                                                                                   \
  } while (0)

inline int test_summary(const char* name) {
  if (g_failures == 0) {
    std::printf("%s: %d checks passed\n", name, g_checks);
    return 0;
  }
  std::printf("%s: %d of %d checks FAILED\n", name, g_failures, g_checks);
  return 1;
}
