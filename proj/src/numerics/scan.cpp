#include "lalnet/scan.hpp"

#include <cmath>

namespace lalnet::ops {

template <class T>
Var<T> selective_scan(const Var<T>& u, const Var<T>& delta, const Var<T>& bmat, const Var<T>& cmat, const Var<T>& a,
                      const Var<T>& dskip) {
  const Shape& su = u.shape();
  if (su.size() != 3) throw ShapeError("selective_scan: u must be [B,D,L], got " + shape_str(su));
  const int64_t B = su[0], D = su[1], L = su[2];
  if (delta.shape() != su) throw ShapeError("selective_scan: delta " + shape_str(delta.shape()) + " vs u " + shape_str(su));
  if (bmat.shape().size() != 3 || bmat.shape()[0] != B || bmat.shape()[2] != L) {
    throw ShapeError("selective_scan: bmat must be [B,N,L], got " + shape_str(bmat.shape()));
  }
  const int64_t N = bmat.shape()[1];
  if (cmat.shape() != bmat.shape()) throw ShapeError("selective_scan: cmat " + shape_str(cmat.shape()) + " vs bmat");
  if (a.shape() != Shape{D, N}) throw ShapeError("selective_scan: a must be [D,N], got " + shape_str(a.shape()));
  if (dskip.shape() != Shape{D}) throw ShapeError("selective_scan: dskip must be [D], got " + shape_str(dskip.shape()));

  const auto& uv = u.value();
  const auto& dv = delta.value();
  const auto& bv = bmat.value();
  const auto& cv = cmat.value();
  const auto& av = a.value();
  const auto& sv = dskip.value();

  // states[b][t][d][n] after step t
  Tensor<T> states(Shape{B, L, D, N});
  Tensor<T> y(Shape{B, D, L});
  for (int64_t b = 0; b < B; ++b) {
    std::vector<T> h(static_cast<size_t>(D * N), T(0));
    for (int64_t t = 0; t < L; ++t) {
      for (int64_t d = 0; d < D; ++d) {
        const T dt = dv[(b * D + d) * L + t];
        const T ut = uv[(b * D + d) * L + t];
        T acc = sv[d] * ut;
        for (int64_t n = 0; n < N; ++n) {
          T& hs = h[d * N + n];
          hs = std::exp(dt * av[d * N + n]) * hs + dt * bv[(b * N + n) * L + t] * ut;
          acc += cv[(b * N + n) * L + t] * hs;
        }
        y[(b * D + d) * L + t] = acc;
      }
      std::copy(h.begin(), h.end(), &states[((b * L) + t) * D * N]);
    }
  }

  NodeId iu = u.id(), idl = delta.id(), ib = bmat.id(), ic = cmat.id(), ia = a.id(), is = dskip.id();
  return u.tape().record(
      "selective_scan", std::move(y), {u, delta, bmat, cmat, a, dskip},
      [=, states = std::move(states)](Tape<T>& tp, NodeId self) {
        const auto& gy = tp.grad_buffer(self);
        const auto& uv = tp.value(iu);
        const auto& dv = tp.value(idl);
        const auto& bv = tp.value(ib);
        const auto& cv = tp.value(ic);
        const auto& av = tp.value(ia);
        const auto& sv = tp.value(is);
        Tensor<T> gu(uv.shape()), gd(dv.shape()), gb(bv.shape()), gc(cv.shape()), ga(av.shape()), gs(sv.shape());
        std::vector<T> r(static_cast<size_t>(D * N));
        for (int64_t b = 0; b < B; ++b) {
          std::fill(r.begin(), r.end(), T(0));  // dL/dh_t carried backwards
          for (int64_t t = L - 1; t >= 0; --t) {
            const T* ht = &states[((b * L) + t) * D * N];
            const T* hprev = t > 0 ? &states[((b * L) + t - 1) * D * N] : nullptr;
            for (int64_t d = 0; d < D; ++d) {
              const int64_t iy = (b * D + d) * L + t;
              const T g = gy[iy];
              const T dt = dv[iy];
              const T ut = uv[iy];
              gs[d] += g * ut;
              T gut = g * sv[d];
              T gdt = T(0);
              for (int64_t n = 0; n < N; ++n) {
                const int64_t ibn = (b * N + n) * L + t;
                gc[ibn] += g * ht[d * N + n];
                T& rr = r[d * N + n];
                rr += g * cv[ibn];
                const T an = av[d * N + n];
                const T da = std::exp(dt * an);
                const T hp = hprev ? hprev[d * N + n] : T(0);
                const T gda = rr * hp;
                gdt += gda * da * an + rr * bv[ibn] * ut;
                ga[d * N + n] += gda * da * dt;
                gb[ibn] += rr * dt * ut;
                gut += rr * dt * bv[ibn];
                rr *= da;
              }
              gd[iy] += gdt;
              gu[iy] += gut;
            }
          }
        }
        tp.accumulate(iu, gu);
        tp.accumulate(idl, gd);
        tp.accumulate(ib, gb);
        tp.accumulate(ic, gc);
        tp.accumulate(ia, ga);
        tp.accumulate(is, gs);
      });
}

template Var<float> selective_scan(const Var<float>&, const Var<float>&, const Var<float>&, const Var<float>&,
                                   const Var<float>&, const Var<float>&);
template Var<double> selective_scan(const Var<double>&, const Var<double>&, const Var<double>&, const Var<double>&,
                                    const Var<double>&, const Var<double>&);

}  // namespace lalnet::ops
