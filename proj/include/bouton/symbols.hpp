#pragma once
// Symbol table. The eight core variables (x, y, z, t, u, v, w, p) have fixed
// ids 0..7; those ids double as bit positions in differential-form masks.
// Further names are interned on demand in a process-wide registry.

#include <cstdint>
#include <deque>
#include <mutex>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>

namespace bouton {

using SymbolId = std::int32_t;

enum class SymbolKind : unsigned char {
  Independent,  // x, y, z, t
  Dependent,    // u, v, w, p
  Parameter,    // nu, tau, k, alpha_x, alpha_t, user constants
  Formal        // bound arguments of function instantiations
};

inline constexpr SymbolId SYM_X = 0;
inline constexpr SymbolId SYM_Y = 1;
inline constexpr SymbolId SYM_Z = 2;
inline constexpr SymbolId SYM_T = 3;
inline constexpr SymbolId SYM_U = 4;
inline constexpr SymbolId SYM_V = 5;
inline constexpr SymbolId SYM_W = 6;
inline constexpr SymbolId SYM_P = 7;
inline constexpr SymbolId SYM_NU = 8;
inline constexpr SymbolId SYM_TAU = 9;
inline constexpr SymbolId SYM_K = 10;
inline constexpr SymbolId SYM_ALPHA_X = 11;
inline constexpr SymbolId SYM_ALPHA_T = 12;
inline constexpr SymbolId SYM_COS_THETA = 13;
inline constexpr SymbolId SYM_SIN_THETA = 14;
inline constexpr int NUM_CORE_SYMBOLS = 8;

struct SymbolInfo {
  std::string name;
  SymbolKind kind = SymbolKind::Parameter;
  // True when the symbol is known positive on the working domain, which
  // licenses distributing fractional powers over products containing it.
  bool positive = false;
};

class SymbolTable {
 public:
  static SymbolTable& instance() {
    static SymbolTable table;
    return table;
  }

  // Returns the id for `name`, interning it with the given attributes if new.
  // Attributes of existing symbols are not modified.
  SymbolId intern(std::string_view name, SymbolKind kind = SymbolKind::Parameter,
                  bool positive = false) {
    {
      std::shared_lock lk(mutex_);
      auto it = by_name_.find(std::string(name));
      if (it != by_name_.end()) return it->second;
    }
    std::unique_lock lk(mutex_);
    auto it = by_name_.find(std::string(name));
    if (it != by_name_.end()) return it->second;
    auto id = static_cast<SymbolId>(infos_.size());
    infos_.push_back(SymbolInfo{std::string(name), kind, positive});
    by_name_.emplace(std::string(name), id);
    return id;
  }

  const SymbolInfo& info(SymbolId id) const {
    std::shared_lock lk(mutex_);
    if (id < 0 || static_cast<std::size_t>(id) >= infos_.size())
      throw std::out_of_range("unknown symbol id " + std::to_string(id));
    return infos_[static_cast<std::size_t>(id)];  // deque: reference stays valid
  }

  // -1 when the name has not been interned.
  SymbolId lookup(std::string_view name) const {
    std::shared_lock lk(mutex_);
    auto it = by_name_.find(std::string(name));
    return it == by_name_.end() ? SymbolId(-1) : it->second;
  }

  std::size_t size() const {
    std::shared_lock lk(mutex_);
    return infos_.size();
  }

 private:
  SymbolTable() {
    auto add = [this](const char* name, SymbolKind kind, bool positive) {
      auto id = static_cast<SymbolId>(infos_.size());
      infos_.push_back(SymbolInfo{name, kind, positive});
      by_name_.emplace(name, id);
      return id;
    };
    add("x", SymbolKind::Independent, false);
    add("y", SymbolKind::Independent, false);
    add("z", SymbolKind::Independent, false);
    add("t", SymbolKind::Independent, true);
    add("u", SymbolKind::Dependent, false);
    add("v", SymbolKind::Dependent, false);
    add("w", SymbolKind::Dependent, false);
    add("p", SymbolKind::Dependent, false);
    add("nu", SymbolKind::Parameter, true);
    add("tau", SymbolKind::Parameter, true);
    add("k", SymbolKind::Parameter, true);
    add("alpha_x", SymbolKind::Parameter, false);
    add("alpha_t", SymbolKind::Parameter, false);
    add("cos_theta", SymbolKind::Parameter, false);
    add("sin_theta", SymbolKind::Parameter, false);
  }

  mutable std::shared_mutex mutex_;
  std::deque<SymbolInfo> infos_;
  std::unordered_map<std::string, SymbolId> by_name_;
};

inline const SymbolInfo& symbol_info(SymbolId id) { return SymbolTable::instance().info(id); }
inline const std::string& symbol_name(SymbolId id) { return symbol_info(id).name; }
inline SymbolId intern_symbol(std::string_view name, SymbolKind kind = SymbolKind::Parameter,
                              bool positive = false) {
  return SymbolTable::instance().intern(name, kind, positive);
}

}  // namespace bouton
