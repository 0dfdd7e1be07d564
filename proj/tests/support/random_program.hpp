#pragma once

#include <random>
#include <string>

namespace vcot::testing {

// Random straight-line Verus function bodies built from a fixed menu.
inline std::string random_program(std::mt19937_64& rng) {
  static const char* kExec[] = {"    x = x + 1;\n", "    let y = x;\n", "    v.push(x);\n", "    if x > 0 { x = x - 1; }\n"};
  static const char* kAssert[] = {"    assert(x >= 0);\n", "    assert(v.len() > 0) by {\n        lemma_len(v@);\n    }\n",
                                  "    proof {\n        assert(x == x);\n    }\n", "    assume(x < 100);\n",
                                  "    assert(x > 0); assert(x > 1);\n"};
  std::string s = "verus! {\n\nfn f(v: &mut Vec<u64>) -> (r: u64)\n    requires\n        old(v).len() > 0,\n    ensures\n        r >= 0,\n{\n    let mut x = 0;\n";
  int stmts = static_cast<int>(rng() % 10);
  for (int i = 0; i < stmts; ++i) {
    switch (rng() % 4) {
      case 0:
      case 1: s += kExec[rng() % 4]; break;
      case 2: s += kAssert[rng() % 5]; break;
      default:
        s += "    while x < 10\n        invariant\n            x <= 10,\n";
        if (rng() % 2) s += "            v.len() > 0,\n";
        s += "        decreases 10 - x,\n    {\n        x += 1;\n";
        if (rng() % 2) s += "        assert(x <= 10);\n";
        s += "    }\n";
        if (rng() % 3 == 0) s += "\n";
    }
  }
  s += "    x\n}\n";
  if (rng() % 2) s += "\nproof fn lemma_len(s: Seq<u64>)\n    ensures\n        s.len() >= 0,\n{\n}\n";
  s += "\n} // verus!\n";
  return s;
}

}  // namespace vcot::testing
