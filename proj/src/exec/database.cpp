#include "saber/exec/database.hpp"
#include "saber/error.hpp"
#include "saber/util/strings.hpp"

namespace saber {

void Database::add(std::string name, Relation relation) {
   if (contains(name)) throw BindingError("table '" + name + "' is already registered");
   tables_.emplace_back(std::move(name), std::move(relation));
}

void Database::put(std::string name, Relation relation) {
   for (auto& [n, r] : tables_) {
      if (util::iequals(n, name)) {
         r = std::move(relation);
         return;
      }
   }
   tables_.emplace_back(std::move(name), std::move(relation));
}

bool Database::contains(std::string_view name) const {
   for (const auto& t : tables_)
      if (util::iequals(t.first, name)) return true;
   return false;
}

const Relation& Database::get(std::string_view name) const {
   for (const auto& t : tables_)
      if (util::iequals(t.first, name)) return t.second;
   throw BindingError("unknown table '" + std::string(name) + "'");
}

std::vector<std::string> Database::names() const {
   std::vector<std::string> out;
   for (const auto& t : tables_) out.push_back(t.first);
   return out;
}

Catalog Database::catalog() const {
   Catalog c;
   for (const auto& [n, r] : tables_) c.emplace(n, r.schema());
   return c;
}

std::size_t Database::total_rows() const {
   std::size_t n = 0;
   for (const auto& t : tables_) n += t.second.size();
   return n;
}

} // namespace saber
