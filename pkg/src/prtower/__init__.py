"""p-adic computer algebra for Perrin-Riou style regulators over cyclotomic towers."""
