#pragma once

#include <map>
#include <string>
#include <vector>

namespace nbe2e::asr {

// Dense token ids: blank, sos, eos and pad come first, then the words.
class Vocabulary {
 public:
  static constexpr int kBlank = 0;
  static constexpr int kSos = 1;
  static constexpr int kEos = 2;
  static constexpr int kPad = 3;

  Vocabulary() = default;
  explicit Vocabulary(const std::vector<std::string>& words);

  int size() const { return static_cast<int>(tokens_.size()); }
  int id(const std::string& token) const;  // throws on unknown tokens
  bool contains(const std::string& token) const { return index_.count(token) != 0; }
  const std::string& token(int id) const { return tokens_.at(id); }
  bool is_special(int id) const { return id <= kPad; }

  // Whitespace-separated words to ids (no sos/eos).
  std::vector<int> encode(const std::string& transcript) const;
  // Word ids back to a space-joined string; special tokens are dropped.
  std::string decode(const std::vector<int>& ids) const;

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, int> index_;
};

std::vector<std::string> split_words(const std::string& text);

}  // namespace nbe2e::asr
