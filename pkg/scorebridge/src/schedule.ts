/** Geometric noise-level schedule sigma_1 < ... < sigma_N. */

export interface Schedule {
  sigmaMin: number;
  sigmaMax: number;
  levels: number;
  sigmas: number[];
}

export function geometricSchedule(levels: number, sigmaMin: number, sigmaMax: number): Schedule {
  if (levels < 2) throw new Error(`need at least 2 levels, got ${levels}`);
  if (!(sigmaMin > 0 && sigmaMin < sigmaMax)) {
    throw new Error(`need 0 < sigmaMin < sigmaMax, got ${sigmaMin}, ${sigmaMax}`);
  }
  const sigmas: number[] = [];
  const ratio = sigmaMax / sigmaMin;
  for (let i = 0; i < levels; i++) {
    sigmas.push(sigmaMin * Math.pow(ratio, i / (levels - 1)));
  }
  return { sigmaMin, sigmaMax, levels, sigmas };
}
