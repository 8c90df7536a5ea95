#include "levsample/parallel.hpp"

#include <cstdlib>
#include <string>

namespace levsample {

unsigned resolve_threads(std::optional<unsigned> requested) {
  if (requested) return std::max(1u, *requested);
  if (const char* env = std::getenv("LEVSAMPLE_THREADS"); env != nullptr && *env != '\0') {
    try {
      const unsigned long value = std::stoul(env);
      if (value >= 1) return static_cast<unsigned>(value);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace levsample
