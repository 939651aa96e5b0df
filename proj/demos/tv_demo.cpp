// Deblurs the synthetic scene with the adaptive-Landweber primal-dual method
// and reports image quality before and after.

#include "itreg/itreg.hpp"

#include <cstdio>

int main() {
  using namespace itreg;
  const Image clean = synthetic_image(64);
  const Image noisy = degrade(clean, 2, 0.025, 3);
  const ProblemSpec prob = assemble_tv_problem(noisy, 2, clean);

  const MethodFactory factory(prob);
  const RunRecord rec = run(prob, factory.make("pdal"), StopRule::oracle(2000, 100), 3);
  const Image restored(64, Vector(rec.best_x.head(64 * 64)));

  const ImageQuality before = image_metrics(noisy, clean);
  const ImageQuality after = image_metrics(restored, clean);
  std::printf("noisy     mse %.5f  psnr %.2f  ssim %.4f\n", before.mse, before.psnr, before.ssim);
  std::printf("restored  mse %.5f  psnr %.2f  ssim %.4f  (iteration %d)\n", after.mse, after.psnr,
              after.ssim, rec.early_stop.stop_iter);
  write_pgm("restored_pdal.pgm", restored);
}
