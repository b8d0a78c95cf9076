#include "funcdec/dha.hpp"

#include "funcdec/dag.hpp"
#include "funcdec/error.hpp"

namespace funcdec {

namespace {

int mode_of(bool d1, bool d2) { return d1 ? 2 : (d2 ? 3 : 1); }

} // namespace

DhaStep dha_simulate(double x, double u) {
    DhaStep s;
    s.d1 = x >= 0.0;
    s.d2 = x + u - 1.0 >= 0.0;
    s.mode = mode_of(s.d1, s.d2);
    switch (s.mode) {
    case 1: s.next = x + u - 1.0; break;
    case 2: s.next = 2.0 * x; break;
    default: s.next = 2.0; break;
    }
    return s;
}

FunctionalDecomposition dha_decomposition() {
    DecompositionBuilder b(2, true, {"x", "u"});
    const Operand one = Operand::constant(1.0);
    const Operand x = b.input(0), u = b.input(1);
    const Operand d1 = b.unary(Prim::Step, x);
    const Operand not_d1 = b.sub(one, d1);
    const Operand guard = b.sub(b.add(x, u), one);
    const Operand d2 = b.unary(Prim::Step, guard);
    const Operand not_d2 = b.sub(one, d2);
    const Operand mode1 = b.mul(not_d1, not_d2);
    const Operand next1 = b.mul(mode1, guard);
    const Operand next2 = b.mul(d1, b.scale(x, 2.0));
    const Operand partial = b.add(next1, next2);
    const Operand mode3 = b.mul(not_d1, d2);
    const Operand out = b.add(partial, b.scale(mode3, 2.0));
    const Operand outs[] = {out};
    return b.finish(outs);
}

FunctionalDecomposition dha_reduced() { return reduce(fold_affine(dha_decomposition())); }

DhaStep dha_evaluate(const FunctionalDecomposition& fd, double x, double u) {
    if (fd.n_x != 2 || fd.outputs.size() != 1) throw DimensionError("not a DHA next-state decomposition");
    const double in[] = {x, u};
    const auto w = eval_all(fd, in);
    DhaStep s;
    int steps = 0;
    for (std::size_t j = fd.n_x; j < fd.size(); ++j) {
        const auto& o = fd.observables[j];
        if (o.kind != ObsKind::Unary || o.op != Prim::Step) continue;
        ++steps;
        (o.args[0] == 0 ? s.d1 : s.d2) = w[j] == 1.0;
    }
    if (steps != 2) throw InvariantError("expected exactly two event generators");
    s.mode = mode_of(s.d1, s.d2);
    s.next = w[fd.outputs[0]];
    return s;
}

} // namespace funcdec
