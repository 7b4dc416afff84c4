#pragma once

#include "saber/algebra/plan.hpp"
#include "saber/relmodel/relation.hpp"
#include <string>
#include <string_view>
#include <vector>

namespace saber {

/// Named relations. Names are matched case-insensitively and must be unique
/// under that comparison.
class Database {
   public:
   /// Throws BindingError when the name is already taken.
   void add(std::string name, Relation relation);
   /// Adds or replaces.
   void put(std::string name, Relation relation);
   bool contains(std::string_view name) const;
   /// Throws BindingError for an unknown name.
   const Relation& get(std::string_view name) const;
   /// Registered names in insertion order.
   std::vector<std::string> names() const;
   Catalog catalog() const;
   /// Sum of the row counts of every table.
   std::size_t total_rows() const;

   private:
   std::vector<std::pair<std::string, Relation>> tables_;
};

} // namespace saber
