"""Nodes join, leave and certify each other in the event simulator."""

from manetpki.simnet import extract, load_scenario, run_scenario

t = run_scenario(load_scenario("churn"))
interesting = {"joined", "depart", "timeout", "partial-own", "certificate-issued",
               "issue-failed", "join-failed", "verified", "decrypted"}
for rec in t.records:
    if rec.kind in interesting:
        print(rec)

active = [rec.get("node") for rec in t.of_kind("state") if rec.get("status") == "active"]
print("\nstill active:", ", ".join(active))
bad = [(a, b) for a in active for b in active
       if extract(t, f"rowpoly:{a}")(extract(t, f"hash:{b}"))
       != extract(t, f"rowpoly:{b}")(extract(t, f"hash:{a}"))]
print("pairwise row checks failing:", bad or "none")
