// Partner-model strip: maps the four expectations to bar widths.

export interface PmView {
  e: number;
  l: number;
  a: number;
  c: number;
}

export const PM_LABELS: Record<keyof PmView, string> = {
  e: "expertise",
  l: "cognitive load",
  a: "attentiveness",
  c: "cooperativeness",
};

export function barWidths(pm: PmView): Record<keyof PmView, string> {
  const clamp = (x: number) => Math.min(1, Math.max(0, x));
  return {
    e: `${(clamp(pm.e) * 100).toFixed(1)}%`,
    l: `${(clamp(pm.l) * 100).toFixed(1)}%`,
    a: `${(clamp(pm.a) * 100).toFixed(1)}%`,
    c: `${(clamp(pm.c) * 100).toFixed(1)}%`,
  };
}
