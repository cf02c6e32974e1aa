#include "narrative/classifier.hpp"

#include "narrative/nn.hpp"

namespace narrative {

ClassProbs ClassProbs::uniform() {
  ClassProbs p;
  p.probs.fill(1.0 / kNumClasses);
  return p;
}

Label ClassProbs::label() const { return label_from_index(argmax(probs)); }

double ClassProbs::sum() const {
  double s = 0.0;
  for (double p : probs) s += p;
  return s;
}

}  // namespace narrative
