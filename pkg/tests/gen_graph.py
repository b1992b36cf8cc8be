def generate_harnack_graphs(csv_file: str, output: str | None = None):
    """Generate graphs from a <scenario>.instances.csv table written by harnack-lab run"""
    import pandas as pd
    import matplotlib.pyplot as plt

    # Read the CSV data
    df = pd.read_csv(csv_file)
    output = output or csv_file.rsplit(".", 1)[0] + ".png"
    colors = {"HOLDS": "tab:green", "INCONCLUSIVE": "tab:orange", "VIOLATED": "tab:red"}

    # Create figure with 3 subplots
    fig, (ax1, ax2, ax3) = plt.subplots(3, 1, figsize=(12, 15))

    # Plot 1: LHS and RHS intervals over |x - y|, one marker per instance
    ax1.errorbar(df["distance"], df["lhs"], yerr=[df["lhs"] - df["lhs_lower"], df["lhs_upper"] - df["lhs"]],
                 fmt="o", label="LHS", alpha=0.7)
    ax1.errorbar(df["distance"], df["rhs"], yerr=[df["rhs"] - df["rhs_lower"], df["rhs_upper"] - df["rhs"]],
                 fmt="s", label="RHS", alpha=0.7)
    ax1.set_title(f"Both Sides per Instance ({df['statement'].iloc[0]})")
    ax1.set_xlabel("|x - y|")
    ax1.set_ylabel("Estimate (99% CI)")
    ax1.legend()
    ax1.grid(True)

    # Plot 2: Margin RHS - LHS against time, colored by verdict
    for verdict, group in df.groupby("verdict"):
        ax2.scatter(group["t"], group["rhs"] - group["lhs"], c=colors.get(verdict, "tab:gray"), label=verdict)
    ax2.axhline(0.0, color="black", linewidth=0.8)
    ax2.set_title("Margin RHS - LHS over Time")
    ax2.set_xlabel("t")
    ax2.set_ylabel("Margin")
    ax2.legend()
    ax2.grid(True)

    # Plot 3: Verdict counts per time
    counts = df.groupby(["t", "verdict"]).size().unstack(fill_value=0)
    counts.plot(kind="bar", stacked=True, ax=ax3, color=[colors.get(v, "tab:gray") for v in counts.columns])
    ax3.set_title("Verdicts per Time")
    ax3.set_xlabel("t")
    ax3.set_ylabel("Instances")
    ax3.grid(True, axis="y")

    # Adjust layout and save
    plt.tight_layout()
    plt.savefig(output)
    plt.close()
    return output


if __name__ == "__main__":
    import sys
    if len(sys.argv) not in (2, 3):
        print("Usage: python gen_graph.py <instances.csv> [output.png]")
        sys.exit(1)

    csv_file = sys.argv[1]
    output = generate_harnack_graphs(csv_file, sys.argv[2] if len(sys.argv) == 3 else None)
    print(f"Graphs generated and saved as '{output}'")
