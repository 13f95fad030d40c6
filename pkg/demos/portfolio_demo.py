# python3
"""
Long-only portfolios: coins, cash, and corrections
==================================================

Three small stories. A perfectly anticorrelated pair of bets cancels to
a riskless book at the average mean. Adding cash to a risky asset either
splits the book (when variance bites) or goes all in (when the asset
dominates even after the belief correction). Finally, the same pipeline
from raw return rows, where the covariance comes out as an exact
rational.
"""
from fractions import Fraction

import topiary.portfolio as pf
from topiary.portfolio import ReturnsTable

print("-- magic coins ------------------------------------------------")
spec = pf.PortfolioSpec(labels=("heads", "tails"), mean=(0.05, 0.05),
                        covariance=((0.02, -0.02), (-0.02, 0.02)))
report = pf.optimize_portfolio(spec)
for label, pid, w in report.weights:
    print("  %-6s %.3f" % (label, w))
print("  variance %.2e  rate %.4f  (riskless: the coins hedge each other)"
      % (report.variance, report.rate))

print("\n-- risky asset plus cash -------------------------------------")
for var, story in ((0.16, "half and half"), (0.04, "go all in")):
    spec = pf.PortfolioSpec(labels=("X",), mean=(0.10,), covariance=((var,),),
                            risk_free_rate=0.02)
    report = pf.optimize_portfolio(spec)
    weights = ", ".join("%s %.2f" % (label, w) for label, _, w in report.weights)
    print("  sigma^2 %.2f -> %s  rate %.4f  (%s)"
          % (var, weights, report.rate, story))
    for row in report.capm:
        if row.label == pf.RISK_FREE_LABEL:
            print("    cash margin %+.4f" % row.alpha_margin)

print("\n-- belief corrections ----------------------------------------")
spec = pf.PortfolioSpec(labels=("X",), mean=(0.10,), covariance=((0.04,),),
                        risk_free_rate=0.02, var_inflate=1.5)
corrected, flagged = pf.apply_risk_belief(spec)
print("  var_inflate 1.5 lifts sigma^2 to %.3f; go-all-in flag: %s"
      % (corrected.covariance[0][0], "yes" if flagged else "no"))

print("\n-- from return rows ------------------------------------------")
table = ReturnsTable(labels=("A", "B"),
                     rows=((0.1, -0.1), (-0.1, 0.1), (0.1, -0.1), (-0.1, 0.1)))
mean, cov = pf.ingest_returns(table)
print("  means (%.1f, %.1f)" % (mean[0], mean[1]))
print("  covariance[0][1] == -1/75 exactly: %s"
      % (cov[0][1] == float(Fraction(-1, 75))))
spec = pf.PortfolioSpec(labels=table.labels, mean=mean, covariance=cov)
report = pf.optimize_portfolio(spec)
print("  optimal book: %s  variance %.2e"
      % (", ".join("%s %.2f" % (l, w) for l, _, w in report.weights),
         report.variance))
