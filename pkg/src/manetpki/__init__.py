"""Self-organised distributed PKI for mobile ad-hoc networks."""
