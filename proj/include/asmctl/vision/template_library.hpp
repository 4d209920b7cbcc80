#pragma once

#include <map>
#include <string>
#include <vector>

#include "asmctl/vision/image.hpp"

namespace asmctl::vision {

// Templates indexed by id. On disk: a manifest with one
// `template <id> <file.pgm>` line per entry, files relative to the
// manifest's directory.
class TemplateLibrary {
 public:
  static TemplateLibrary load(const std::string& manifest_path);

  void add(Template tpl);
  const Template* find(const std::string& template_id) const;
  bool contains(const std::string& template_id) const {
    return find(template_id) != nullptr;
  }
  std::vector<std::string> ids() const;
  std::size_t size() const { return templates_.size(); }

 private:
  std::map<std::string, Template> templates_;
};

}  // namespace asmctl::vision
