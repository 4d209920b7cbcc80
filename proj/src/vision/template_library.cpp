#include "asmctl/vision/template_library.hpp"

#include <filesystem>

#include "asmctl/text_format.hpp"
#include "asmctl/vision/pgm.hpp"

namespace asmctl::vision {

TemplateLibrary TemplateLibrary::load(const std::string& manifest_path) {
  const auto base = std::filesystem::path(manifest_path).parent_path();
  TemplateLibrary lib;
  for (const auto& d : text::parse_blocks(text::read_file(manifest_path))) {
    if (d.keyword != "template" || d.args.size() != 2) {
      throw SyntaxError(d.line, "expected 'template <id> <file>'");
    }
    if (lib.contains(d.args[0])) {
      throw SyntaxError(d.line, "duplicate template '" + d.args[0] + "'");
    }
    lib.add(Template(d.args[0], read_pgm((base / d.args[1]).string())));
  }
  return lib;
}

void TemplateLibrary::add(Template tpl) {
  const std::string id = tpl.id();
  templates_.insert_or_assign(id, std::move(tpl));
}

const Template* TemplateLibrary::find(const std::string& template_id) const {
  auto it = templates_.find(template_id);
  return it == templates_.end() ? nullptr : &it->second;
}

std::vector<std::string> TemplateLibrary::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, _] : templates_) out.push_back(id);
  return out;
}

}  // namespace asmctl::vision
