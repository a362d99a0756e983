# Tool modules