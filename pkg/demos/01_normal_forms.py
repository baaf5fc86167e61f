"""Words, pinches and Britton normal forms in G11 and G_W."""

from hnnpatterns.presentation import (
    apply_pinch,
    base_word_metric,
    find_pinch,
    format_word,
    g11,
    gw,
    normalize,
    parse_word,
)

p = g11()
print("G11 generators:", ", ".join(f"{g}={v}" for g, v in p.base_gens),
      "| rules:", ", ".join(f"{r.name}^-1 {r.u_gen} {r.name} = {r.v_gen}" for r in p.stable_rules))

w = parse_word("b' s' a^3 s c' d")
r = find_pinch(w, p)
print(f"\n{format_word(w)}: pinch at [{r.start}, {r.end}) -> {format_word(apply_pinch(w, r))}")

for text in ["c d", "s' a s c'", "b' s^2 a s' d^4", "t a t' s"]:
    nf = normalize(parse_word(text), p)
    print(f"normal form of {text:>16}: {nf.format(p)}")

print("\nbase metric on Z^2 with a, b, c, d is the max norm:")
for v in [(3, 1), (2, -5), (4, 0)]:
    print(f"  |{v}| = {base_word_metric(v, p)}")

q = gw()
print("\nG_W: d = (2,2) is a single generator, so |(2,2)| =", base_word_metric((2, 2), q))
print("s d s^-1 pinches to", format_word(find_pinch(parse_word("s d s'"), q).replacement_base_word))
