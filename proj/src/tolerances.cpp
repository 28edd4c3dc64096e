#include "mdilate/tolerances.hpp"

namespace mdilate {

namespace {

template <typename Fn>
void for_each_tolerance(Tolerances& t, Fn&& fn) {
  fn("herm", t.herm);
  fn("psd", t.psd);
  fn("sqrt", t.sqrt);
  fn("rank", t.rank);
  fn("eig", t.eig);
  fn("comm", t.comm);
  fn("inv", t.inv);
  fn("stein", t.stein);
  fn("welldef", t.welldef);
  fn("fixed_point_step", t.fixed_point_step);
  fn("plateau", t.plateau);
  fn("dilation", t.dilation);
  fn("powers", t.powers);
  fn("isometry", t.isometry);
  fn("criterion", t.criterion);
  fn("difference", t.difference);
  fn("oracle", t.oracle);
  fn("remark", t.remark);
  fn("minimality_rank", t.minimality_rank);
  fn("cert", t.cert);
}

}  // namespace

bool Tolerances::set(std::string_view name, double value) {
  bool found = false;
  for_each_tolerance(*this, [&](std::string_view n, double& v) {
    if (n == name) {
      v = value;
      found = true;
    }
  });
  return found;
}

std::vector<std::pair<std::string, double>> Tolerances::entries() const {
  std::vector<std::pair<std::string, double>> out;
  Tolerances copy = *this;
  for_each_tolerance(copy, [&](std::string_view n, double& v) { out.emplace_back(n, v); });
  return out;
}

}  // namespace mdilate
