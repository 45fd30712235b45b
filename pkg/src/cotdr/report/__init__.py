"""Summary report rendering."""
