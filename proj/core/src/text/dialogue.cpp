#include "hcn/text/dialogue.hpp"

#include <charconv>

#include "hcn/common/error.hpp"
#include "hcn/common/io.hpp"
#include "hcn/text/tokenize.hpp"

namespace hcn::text {
namespace {

class DialogueBuilder {
 public:
  bool empty() const { return lines_ == 0; }
  std::size_t expected_number() const { return lines_ + 1; }

  void add_turn(std::string_view user, std::string_view system) {
    Turn t;
    t.raw_user = std::string(trim(user));
    t.raw_system = std::string(trim(system));
    t.user_tokens = tokenize(t.raw_user);
    current_.turns.push_back(std::move(t));
    ++lines_;
  }

  void add_fact(std::string_view body, std::size_t line_no) {
    auto parts = split_whitespace(body);
    if (parts.size() < 3) throw ParseError("knowledge-base line needs entity, relation and value", line_no);
    KbFact f;
    f.entity = parts[0];
    f.relation = parts[1];
    parts.erase(parts.begin(), parts.begin() + 2);
    f.value = join(parts);
    f.position = current_.turns.size();
    current_.kb_facts.push_back(std::move(f));
    ++lines_;
  }

  void finish(std::vector<Dialogue>& out, std::size_t line_no) {
    if (empty()) return;
    if (current_.turns.empty()) throw ParseError("dialogue has no turns", line_no);
    out.push_back(std::move(current_));
    current_ = Dialogue{};
    lines_ = 0;
  }

 private:
  Dialogue current_;
  std::size_t lines_ = 0;
};

}  // namespace

std::vector<Dialogue> parse_dialogues(std::string_view contents) {
  std::vector<Dialogue> out;
  DialogueBuilder builder;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < contents.size()) {
    std::size_t end = contents.find('\n', pos);
    if (end == std::string_view::npos) end = contents.size();
    std::string_view line = contents.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (trim(line).empty()) {
      builder.finish(out, line_no);
      continue;
    }

    std::size_t number = 0;
    const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), number);
    if (ec != std::errc{} || ptr == line.data() || ptr == line.data() + line.size() || *ptr != ' ') {
      throw ParseError("expected a line number followed by a space", line_no);
    }
    if (number == 1 && !builder.empty()) builder.finish(out, line_no);
    if (number != builder.expected_number()) {
      throw ParseError("line number " + std::to_string(number) + " where " +
                           std::to_string(builder.expected_number()) + " was expected",
                       line_no);
    }
    const std::string_view body = line.substr(static_cast<std::size_t>(ptr - line.data()) + 1);
    const std::size_t tab = body.find('\t');
    if (tab == std::string_view::npos) {
      builder.add_fact(body, line_no);
    } else {
      builder.add_turn(body.substr(0, tab), body.substr(tab + 1));
    }
  }
  builder.finish(out, line_no + 1);
  return out;
}

std::vector<Dialogue> parse_split(const std::filesystem::path& path) {
  return parse_dialogues(read_file(path));
}

std::string serialize_dialogues(const std::vector<Dialogue>& dialogues) {
  std::string out;
  for (const Dialogue& d : dialogues) {
    std::size_t n = 0;
    for_each_line(
        d,
        [&](const KbFact& f) {
          out += std::to_string(++n) + ' ' + f.entity + ' ' + f.relation + ' ' + f.value + '\n';
        },
        [&](const Turn& t, std::size_t) {
          out += std::to_string(++n) + ' ' + t.raw_user + '\t' + t.raw_system + '\n';
        });
    out += '\n';
  }
  return out;
}

}  // namespace hcn::text
