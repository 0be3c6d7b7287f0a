import sys

import numpy as np
import pandas as pd
import matplotlib.pyplot as plt

from src.complexity import fit_loglog, read_curve

curve_paths = sys.argv[1:] or ['output/curve.csv']

fig, ax = plt.subplots()
for path in curve_paths:
    data = read_curve(path)
    points = data.groupby('N')['M'].agg(['mean', 'std']).reset_index()
    slope, intercept, r_squared = fit_loglog(zip(points['N'], points['mean']))

    label = data['metric'].iloc[0] + ('' if pd.isna(data['k'].iloc[0]) else f"-{data['k'].iloc[0]}")
    ax.errorbar(points['N'], points['mean'], yerr = points['std'], fmt = 'o', capsize = 3, label = f"{label} (slope {slope:.2f})")
    ax.plot(points['N'], np.exp(intercept) * points['N'] ** slope, color = 'grey', lw = .8)

ax.set_xscale('log')
ax.set_yscale('log')
ax.set_xlabel('N')
ax.set_ylabel('M')
ax.legend()
plt.savefig('curve.png', dpi = 300)
